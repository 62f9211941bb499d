#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "luresid/certificate.hpp"
#include "luresid/model.hpp"
#include "luresid/sdp/solver.hpp"
#include "luresid/types.hpp"

namespace luresid::sdp {

/// Diagnostics common to the pipeline solves, recorded in run outputs.
struct SdpRunInfo {
  SdpStatus status = SdpStatus::numerical_failure;
  int newton_iterations = 0;
  double gap = 0;
  double phase1_slack = 0;
  std::string message;
  SdpSettings settings;
};

struct RestoreOptions {
  /// Keep L identically zero (standard-sector training).
  bool pin_l_zero = false;
  /// Strict margin on the stability and region LMIs; deep enough that the
  /// trainer's first gradient steps stay inside.
  double margin = 1e-6;
  /// Positivity floor for the multiplier diagonal.
  double m_floor = 1e-9;
  /// Optional (P, L, M) seed for the search, e.g. the certificate that just
  /// failed verification. A nearby start keeps the restored point close to
  /// the current scale instead of wherever a cold solve wanders.
  std::optional<Certificate> warm_start;
  SdpSettings solver;
  /// When nonempty, the assembled problem is dumped as JSON to this path.
  std::string dump_path;
};

struct RestoreResult {
  SdpStatus status = SdpStatus::numerical_failure;
  std::optional<Certificate> certificate;
  SdpRunInfo info;
};

/// Fixes (theta, s, alpha) and searches for (P, L, M) satisfying the
/// stability and region LMIs with a strict margin. The scalar admissibility
/// condition delta^2 <= (1 - alpha^2) s^2 is theta-independent and checked
/// up front as a precondition.
RestoreResult feasibility_restore(const ModelParams& params, double s,
                                  double alpha, double delta,
                                  const RestoreOptions& options = {});

struct InitializeOptions {
  bool pin_l_zero = false;
  double margin = 1e-6;
  double m_floor = 1e-9;
  /// Relative inflation of the minimal admissible s; keeps the input-bound
  /// inequality strictly interior so barrier terms start finite.
  double eps_s = 0.01;
  SdpSettings solver;
  std::string dump_path;
};

struct Initialization {
  ModelParams params;
  Certificate certificate;
  SdpRunInfo info;
};

/// Feasible starting point construction: alpha = 0.99, A = 0.9 I,
/// C = [I 0], B2 = D = D12 = 0, C2 with i.i.d. uniform(-1, 1) entries from
/// the seed, s = (1 + eps_s) sqrt(delta^2 / (1 - alpha^2)); then an SDP over
/// (P, L, M, B, D21), all of which enter the stability LMI affinely, with
/// the optional ball condition beta^2 I <= s^2 P. Deterministic in
/// (dims, delta, beta, seed).
Initialization initialize(const Dimensions& dims, double delta,
                          std::optional<double> beta, std::uint64_t seed,
                          const InitializeOptions& options = {});

struct PostProcessOptions {
  /// Attainability cap on the region scale: s_hat >= 1 / s_max^2. Without it
  /// the infimum is not attained for globally stable models, where the
  /// region can grow without bound.
  double s_max = 1e6;
  double m_floor = 1e-9;
  SdpSettings solver;
  std::string dump_path;
};

struct PostProcessResult {
  SdpStatus status = SdpStatus::numerical_failure;
  std::optional<Certificate> certificate;
  double s_hat = 0;  // optimal 1/s^2
  SdpRunInfo info;
};

/// Region maximization at fixed theta and alpha: minimize s_hat = 1/s^2 over
/// (s_hat, P, L, M) subject to the stability LMI, the region LMIs
/// [[s_hat, l_i], [l_i', P]] >= 0, and delta^2 s_hat <= 1 - alpha^2.
PostProcessResult post_process(const ModelParams& params, double alpha,
                               double delta,
                               const PostProcessOptions& options = {});

}  // namespace luresid::sdp
