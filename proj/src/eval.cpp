#include "luresid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "luresid/io.hpp"

namespace luresid {

bool is_divergent(const Trajectory& traj, const DivergenceRule& rule) {
  if (traj.diverged || traj.truncated_at) return true;
  const Index len = traj.length();
  if (len == 0) return false;
  const auto tail = static_cast<Index>(
      std::ceil(rule.tail_fraction * static_cast<double>(len)));
  double peak = 0.0;
  for (Index k = std::max<Index>(0, len - std::max<Index>(tail, 1)); k < len;
       ++k) {
    const auto& yk = traj.y[static_cast<std::size_t>(k)];
    if (yk.size() > 0) {
      peak = std::max(peak, yk.cwiseAbs().maxCoeff());
    }
  }
  return peak > rule.threshold;
}

Index parameter_count(const Dimensions& dims) {
  const Index n = dims.n, r = dims.r, e = dims.e, m = dims.m;
  return n * n + n * r + n * m + e * n + e * r + e * m + m * n + m * r;
}

EvalReport evaluate(const ModelParams& params,
                    const std::optional<Certificate>& certificate,
                    const Dataset& test, double delta,
                    const DivergenceRule& rule) {
  params.validate();
  if (test.trajectories.empty()) {
    throw ConfigError("evaluate: empty test dataset");
  }
  EvalReport report;
  report.delta = delta;
  report.trajectories = static_cast<Index>(test.trajectories.size());
  report.parameter_count = parameter_count(params.dims);

  std::vector<Vec> pooled_pred, pooled_ref;
  for (const auto& truth : test.trajectories) {
    const Trajectory pred = simulate(params, truth.x0, truth.u);
    const bool truth_div = is_divergent(truth, rule);
    const bool pred_div = is_divergent(pred, rule);
    if (truth_div && pred_div) ++report.counts.truth_div_pred_div;
    if (truth_div && !pred_div) ++report.counts.truth_div_pred_conv;
    if (!truth_div && pred_div) ++report.counts.truth_conv_pred_div;
    if (!truth_div && !pred_div) ++report.counts.truth_conv_pred_conv;

    const auto K = static_cast<std::size_t>(pred.length());
    for (std::size_t k = 0; k < K; ++k) {
      pooled_pred.push_back(pred.y[k]);
      pooled_ref.push_back(truth.y[k]);
    }
  }
  report.nrmse = nrmse(pooled_pred, pooled_ref);

  if (certificate) {
    const auto check = check_certificate(params, *certificate, delta);
    report.certificate_status = check.passed() ? "feasible" : "infeasible";
    if (check.region.X.rows() > 0 && check.lambda_max > 0.0) {
      Eigen::SelfAdjointEigenSolver<Mat> es(check.region.X);
      if (es.info() == Eigen::Success &&
          es.eigenvalues().minCoeff() > 0.0) {
        report.region_semi_axes =
            es.eigenvalues().cwiseInverse().cwiseSqrt();
      }
    }
  }
  return report;
}

void write_phase_csv(const ModelParams& params, const Dataset& test,
                     const std::string& path, const DivergenceRule& rule) {
  std::ostringstream out;
  out.precision(17);
  out << "traj_id,k";
  for (Index i = 0; i < params.dims.n; ++i) out << ",x" << (i + 1);
  out << ",diverged_truth,diverged_pred\n";
  Index traj_id = 0;
  for (const auto& truth : test.trajectories) {
    const Trajectory pred =
        simulate(params, truth.x0, truth.u, /*record_internal=*/true);
    const int truth_div = is_divergent(truth, rule) ? 1 : 0;
    const int pred_div = is_divergent(pred, rule) ? 1 : 0;
    for (std::size_t k = 0; k < pred.x.size(); ++k) {
      out << traj_id << "," << k;
      for (Index i = 0; i < params.dims.n; ++i) out << "," << pred.x[k][i];
      out << "," << truth_div << "," << pred_div << "\n";
    }
    ++traj_id;
  }
  write_text_file(path, out.str());
}

}  // namespace luresid
