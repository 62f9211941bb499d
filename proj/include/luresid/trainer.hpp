#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "luresid/certificate.hpp"
#include "luresid/dataset.hpp"
#include "luresid/model.hpp"
#include "luresid/sdp/pipeline.hpp"
#include "luresid/types.hpp"

namespace luresid {

enum class TrainMode { gensec, stdsec, nosec };

const char* to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

struct TrainConfig {
  TrainMode mode = TrainMode::gensec;
  Index epochs = 500;
  Index batch_size = 32;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double nu0 = 1e-3;
  double nu_decay = 0.999;
  double nu_min = 1e-6;
  double delta = 0.0;      // input bound, taken from the dataset
  Index check_every = 1;   // epochs between feasibility checks
  std::uint64_t seed = 0;
  Index rollback_limit = 10;

  // Learned model sizes; input/output widths come from the data.
  Index model_n = 2;
  Index model_m = 2;
  // Optional ball radius the initial region must contain (0 disables).
  double beta = 0.0;

  sdp::SdpSettings solver;

  void validate() const;
};

/// Every trained quantity in one place: the model matrices plus the
/// certificate variables in their optimization parameterization (P full,
/// M as diagonal vector, sigma = s^2).
struct Learnable {
  ModelParams theta;
  Mat P;
  Vec m_diag;
  Mat L;
  double alpha = 0.5;
  double sigma = 1.0;

  [[nodiscard]] Certificate certificate() const;
  static Learnable from(const ModelParams& params, const Certificate& cert);
};

/// Frozen flat layout, column-major per matrix:
///   [A, B, B2, C, D, D12, C2, D21, P, m_diag, L, alpha, sigma]
Index flat_size(const Dimensions& dims);
Vec flatten(const Learnable& w);
Learnable unflatten(const Vec& x, const Dimensions& dims);

/// -log det(-C) if C is negative definite, +infinity otherwise.
double barrier(const Mat& C);

struct LossParts {
  double total = 0.0;
  double mse_part = 0.0;
  double barrier_part = 0.0;
};

using Batch = std::vector<const Trajectory*>;

LossParts training_loss(const Learnable& w, const Batch& batch, double nu,
                        TrainMode mode, double delta);

/// Exact gradient of training_loss in the Learnable parameterization
/// (BPTT for the prediction error, inverse-weighted trace identities for the
/// log-det terms). Throws if the loss is not finite at w.
Learnable loss_gradient(const Learnable& w, const Batch& batch, double nu,
                        TrainMode mode, double delta);

struct AdamState {
  Vec m, v;
  Index t = 0;

  static AdamState zero(Index size);
};

/// Advances the moments with `grad` and returns the update step (to be
/// added to the flat parameter vector; callers may scale it down).
Vec adam_step(AdamState& state, const Vec& grad, const TrainConfig& config);

struct EpochRecord {
  Index epoch = 0;
  double mse = 0.0;
  double barrier = 0.0;
  double total = 0.0;
  double nu = 0.0;
  bool feasible = false;
  bool restored = false;
  bool rolled_back = false;
};

struct TrainResult {
  ModelParams params;
  std::optional<Certificate> certificate;  // absent in nosec mode
  std::vector<EpochRecord> history;
  Index total_rollbacks = 0;
  Index total_restores = 0;
};

struct InitialPoint {
  ModelParams params;
  Certificate certificate;
};

/// Full training loop: per-epoch shuffled mini-batches, Adam with step
/// halving on +infinity losses, per-epoch Cholesky feasibility check with
/// SDP restoration and snapshot rollback. Deterministic given config.seed.
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const std::optional<InitialPoint>& warm_start = std::nullopt);

/// Header: epoch,mse,barrier,total,nu,feasible,restored,rolled_back
void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::string& path);

}  // namespace luresid
