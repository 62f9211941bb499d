#pragma once

#include <optional>
#include <string>

#include "luresid/certificate.hpp"
#include "luresid/dataset.hpp"
#include "luresid/model.hpp"
#include "luresid/types.hpp"

namespace luresid {

/// A trajectory counts as divergent when the simulation guard tripped or the
/// output magnitude in the trailing window exceeds the threshold. Bounded
/// responses of the benchmark system stay well under the threshold while
/// escaping ones blow through it, so the window test separates them cleanly.
struct DivergenceRule {
  double threshold = 25.0;
  double tail_fraction = 0.2;
};

bool is_divergent(const Trajectory& traj, const DivergenceRule& rule = {});

/// 2x2 consistency table between ground-truth and predicted divergence.
struct ConsistencyCounts {
  Index truth_div_pred_div = 0;
  Index truth_div_pred_conv = 0;
  Index truth_conv_pred_div = 0;
  Index truth_conv_pred_conv = 0;

  [[nodiscard]] Index total() const {
    return truth_div_pred_div + truth_div_pred_conv + truth_conv_pred_div +
           truth_conv_pred_conv;
  }
  [[nodiscard]] Index truth_divergent() const {
    return truth_div_pred_div + truth_div_pred_conv;
  }
  [[nodiscard]] Index pred_divergent() const {
    return truth_div_pred_div + truth_conv_pred_div;
  }
};

struct EvalReport {
  std::string mode = "model";
  double nrmse = 0.0;
  std::string certificate_status = "none";  // feasible | infeasible | none
  double delta = 0.0;
  Vec region_semi_axes;  // empty without a positive-definite certificate
  ConsistencyCounts counts;
  Index trajectories = 0;
  Index parameter_count = 0;
};

/// Number of trainable model entries (the eight theta matrices).
Index parameter_count(const Dimensions& dims);

/// Rolls the model over every test trajectory; NRMSE is computed on the
/// pooled prediction/reference pairs (divergent rollouts contribute their
/// finite prefix).
EvalReport evaluate(const ModelParams& params,
                    const std::optional<Certificate>& certificate,
                    const Dataset& test, double delta,
                    const DivergenceRule& rule = {});

/// Predicted state trajectories with per-trajectory divergence flags,
/// header traj_id,k,x1,..,xn,diverged_truth,diverged_pred.
void write_phase_csv(const ModelParams& params, const Dataset& test,
                     const std::string& path, const DivergenceRule& rule = {});

}  // namespace luresid
