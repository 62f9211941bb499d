#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "luresid/types.hpp"

namespace luresid {

/// Scalar deadzone: zero on [-1, 1], slope one outside.
template <class Scalar>
Scalar deadzone(Scalar v) {
  if (v > Scalar(1)) return v - Scalar(1);
  if (v < Scalar(-1)) return v + Scalar(1);
  return Scalar(0);
}

/// Subgradient convention at the kinks: 0 on |v| <= 1, 1 outside.
template <class Scalar>
Scalar deadzone_derivative(Scalar v) {
  return (v > Scalar(1) || v < Scalar(-1)) ? Scalar(1) : Scalar(0);
}

template <class Scalar>
VecX<Scalar> deadzone(const VecX<Scalar>& v) {
  return v.unaryExpr([](Scalar t) { return deadzone(t); });
}

/// The eight matrices of the Lur'e state-space model
///
///   x+ = A x + B u + B2 w
///   y  = C x + D u + D12 w
///   v  = C2 x + D21 u,   w = dzn(v)  (elementwise deadzone)
///
/// The nonlinearity input v has no direct w feedthrough, so a step is
/// explicit (no algebraic loop).
template <class Scalar>
struct ModelParamsT {
  Dimensions dims;
  MatX<Scalar> A, B, B2, C, D, D12, C2, D21;

  static ModelParamsT zero(const Dimensions& d) {
    d.validate();
    ModelParamsT p;
    p.dims = d;
    p.A = MatX<Scalar>::Zero(d.n, d.n);
    p.B = MatX<Scalar>::Zero(d.n, d.r);
    p.B2 = MatX<Scalar>::Zero(d.n, d.m);
    p.C = MatX<Scalar>::Zero(d.e, d.n);
    p.D = MatX<Scalar>::Zero(d.e, d.r);
    p.D12 = MatX<Scalar>::Zero(d.e, d.m);
    p.C2 = MatX<Scalar>::Zero(d.m, d.n);
    p.D21 = MatX<Scalar>::Zero(d.m, d.r);
    return p;
  }

  void validate() const {
    dims.validate();
    auto want = [](const MatX<Scalar>& M, Index rows, Index cols,
                   const char* name) {
      if (M.rows() != rows || M.cols() != cols) {
        throw ConfigError(std::string("ModelParams: matrix ") + name +
                          " has shape " + std::to_string(M.rows()) + "x" +
                          std::to_string(M.cols()) + ", expected " +
                          std::to_string(rows) + "x" + std::to_string(cols));
      }
      if (!M.allFinite()) {
        throw ConfigError(std::string("ModelParams: matrix ") + name +
                          " contains non-finite entries");
      }
    };
    want(A, dims.n, dims.n, "A");
    want(B, dims.n, dims.r, "B");
    want(B2, dims.n, dims.m, "B2");
    want(C, dims.e, dims.n, "C");
    want(D, dims.e, dims.r, "D");
    want(D12, dims.e, dims.m, "D12");
    want(C2, dims.m, dims.n, "C2");
    want(D21, dims.m, dims.r, "D21");
  }
};

using ModelParams = ModelParamsT<double>;

/// One rollout. `y` holds measured outputs for recorded data and predictions
/// for simulated data. Internal sequences are filled only when requested.
/// `truncated_at` marks the step where the divergence guard stopped the
/// simulation; `diverged` is the trajectory-level classification flag kept
/// alongside generated data.
template <class Scalar>
struct TrajectoryT {
  VecX<Scalar> x0;
  std::vector<VecX<Scalar>> u;
  std::vector<VecX<Scalar>> y;
  std::vector<VecX<Scalar>> x, v, w;  // diagnostics, optional
  std::optional<Index> truncated_at;
  bool diverged = false;

  [[nodiscard]] Index length() const { return static_cast<Index>(y.size()); }
};

using Trajectory = TrajectoryT<double>;

template <class Scalar>
struct StepResultT {
  VecX<Scalar> x_next, y_hat, v, w;
};

/// One application of the model map. Pure; bit-identical on repeated calls.
template <class Scalar>
StepResultT<Scalar> step(const ModelParamsT<Scalar>& params,
                         const VecX<Scalar>& x, const VecX<Scalar>& u) {
  if (x.size() != params.dims.n || u.size() != params.dims.r) {
    throw ConfigError("step: state/input size does not match model dims");
  }
  StepResultT<Scalar> out;
  out.v = params.C2 * x + params.D21 * u;
  out.w = deadzone<Scalar>(out.v);
  out.x_next = params.A * x + params.B * u + params.B2 * out.w;
  out.y_hat = params.C * x + params.D * u + params.D12 * out.w;
  return out;
}

/// Any state component beyond this magnitude stops a rollout; the trajectory
/// keeps its finite prefix and is flagged. Keeps losses finite on data that
/// intentionally contains diverging motions.
inline constexpr double kDivergenceGuard = 1e9;

/// Rollout of `step` over the input sequence. Predictions for steps
/// 0..N-1 land in `y`. If the guard trips at step k, `u` and `y` are cut to
/// the k+1 completed steps and `truncated_at` records k.
template <class Scalar>
TrajectoryT<Scalar> simulate(const ModelParamsT<Scalar>& params,
                             const VecX<Scalar>& x0,
                             const std::vector<VecX<Scalar>>& u,
                             bool record_internal = false) {
  if (u.empty()) throw ConfigError("simulate: empty input sequence");
  TrajectoryT<Scalar> traj;
  traj.x0 = x0;
  traj.u.reserve(u.size());
  traj.y.reserve(u.size());
  VecX<Scalar> x = x0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    auto s = step(params, x, u[k]);
    traj.u.push_back(u[k]);
    traj.y.push_back(s.y_hat);
    if (record_internal) {
      traj.x.push_back(x);
      traj.v.push_back(s.v);
      traj.w.push_back(s.w);
    }
    if (!s.x_next.allFinite() ||
        s.x_next.cwiseAbs().maxCoeff() > Scalar(kDivergenceGuard)) {
      traj.truncated_at = static_cast<Index>(k);
      traj.diverged = true;
      break;
    }
    x = s.x_next;
  }
  return traj;
}

/// Mean squared prediction error: (1/N) sum_k |y_hat_k - y_k|^2.
template <class Scalar>
Scalar mse(const std::vector<VecX<Scalar>>& y_hat,
           const std::vector<VecX<Scalar>>& y) {
  if (y_hat.size() != y.size()) {
    throw ConfigError("mse: sequence lengths differ (" +
                      std::to_string(y_hat.size()) + " vs " +
                      std::to_string(y.size()) + ")");
  }
  if (y.empty()) throw ConfigError("mse: empty sequences");
  Scalar acc = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    acc += (y_hat[k] - y[k]).squaredNorm();
  }
  return acc / static_cast<Scalar>(y.size());
}

/// RMSE normalized by the per-channel population standard deviation of the
/// reference, averaged over channels.
template <class Scalar>
Scalar nrmse(const std::vector<VecX<Scalar>>& y_hat,
             const std::vector<VecX<Scalar>>& y) {
  if (y_hat.size() != y.size()) {
    throw ConfigError("nrmse: sequence lengths differ");
  }
  if (y.empty()) throw ConfigError("nrmse: empty sequences");
  const Index e = y.front().size();
  const auto N = static_cast<Scalar>(y.size());
  VecX<Scalar> mean = VecX<Scalar>::Zero(e);
  for (const auto& yk : y) mean += yk;
  mean /= N;
  VecX<Scalar> var = VecX<Scalar>::Zero(e);
  VecX<Scalar> err = VecX<Scalar>::Zero(e);
  for (std::size_t k = 0; k < y.size(); ++k) {
    var += (y[k] - mean).cwiseAbs2();
    err += (y_hat[k] - y[k]).cwiseAbs2();
  }
  var /= N;
  err /= N;
  Scalar acc = 0;
  for (Index c = 0; c < e; ++c) {
    if (!(var[c] > Scalar(0))) {
      throw ConfigError("nrmse: reference channel " + std::to_string(c) +
                        " has zero variance");
    }
    acc += std::sqrt(err[c]) / std::sqrt(var[c]);
  }
  return acc / static_cast<Scalar>(e);
}

}  // namespace luresid
