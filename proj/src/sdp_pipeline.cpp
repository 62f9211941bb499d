#include "luresid/sdp/pipeline.hpp"

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "luresid/io.hpp"
#include "luresid/rng.hpp"

namespace luresid::sdp {

namespace {

constexpr Index tri_count(Index n) { return n * (n + 1) / 2; }

/// Loose box bound applied to every decision variable so the barrier
/// subproblems have compact sublevel sets (otherwise directions that only
/// inflate a determinant, like growing M when B2 = 0, drive the barrier to
/// minus infinity). Orders of magnitude above anything a sane certificate
/// needs, so it never binds at an optimum we care about.
constexpr double kBoxCap = 1e8;

/// Upper-triangle (column-major) packing of a symmetric matrix.
Mat sym_from_segment(const Vec& x, Index first, Index n) {
  Mat S(n, n);
  Index k = first;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      S(i, j) = x[k];
      S(j, i) = x[k];
      ++k;
    }
  }
  return S;
}

void pack_sym(Vec& x, Index first, const Mat& S) {
  Index k = first;
  for (Index j = 0; j < S.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) x[k++] = S(i, j);
  }
}

Mat mat_from_segment(const Vec& x, Index first, Index rows, Index cols) {
  Mat M(rows, cols);
  Index k = first;
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) M(i, j) = x[k++];
  }
  return M;
}

/// Extracts constant and per-variable coefficient matrices of an affine
/// matrix-valued map by evaluating it at zero and at unit vectors, then
/// registers them on the problem block.
void register_affine_block(SdpProblem& problem, Index lmi,
                           const std::function<Mat(const Vec&)>& assemble,
                           Index num_vars) {
  const Mat A0 = assemble(Vec::Zero(num_vars));
  problem.set_constant(lmi, A0);
  Vec e = Vec::Zero(num_vars);
  for (Index i = 0; i < num_vars; ++i) {
    e[i] = 1.0;
    const Mat Ai = assemble(e) - A0;
    e[i] = 0.0;
    if (Ai.cwiseAbs().maxCoeff() > 0.0) problem.add_coefficient(lmi, i, Ai);
  }
}

/// m_i >= floor and m_i <= cap as 1x1 blocks, P <= cap I as an n x n block.
void register_pm_bounds(SdpProblem& problem, Index vP, Index vM, Index n,
                        Index m, double m_floor, Index num_vars) {
  for (Index i = 0; i < m; ++i) {
    const Index lmi_m = problem.add_lmi("M" + std::to_string(i + 1), 1);
    register_affine_block(
        problem, lmi_m,
        [vM, i, m_floor](const Vec& x) {
          return Mat::Constant(1, 1, x[vM + i] - m_floor);
        },
        num_vars);
  }
  const Index lmi_mbox = problem.add_lmi("M_box", m);
  register_affine_block(
      problem, lmi_mbox,
      [vM, m](const Vec& x) -> Mat {
        return Mat((kBoxCap - x.segment(vM, m).array()).matrix().asDiagonal());
      },
      num_vars);
  const Index lmi_pbox = problem.add_lmi("P_box", n);
  register_affine_block(
      problem, lmi_pbox,
      [vP, n](const Vec& x) -> Mat {
        return kBoxCap * Mat::Identity(n, n) - sym_from_segment(x, vP, n);
      },
      num_vars);
}

SdpRunInfo run_info(const SdpSolution& sol, const SdpSettings& settings) {
  SdpRunInfo info;
  info.status = sol.status;
  info.newton_iterations = sol.newton_iterations;
  info.gap = sol.gap;
  info.phase1_slack = sol.phase1_slack;
  info.message = sol.message;
  info.settings = settings;
  return info;
}

void maybe_dump(const SdpProblem& problem, const std::string& path) {
  if (!path.empty()) save_json_file(problem.dump(), path);
}

}  // namespace

RestoreResult feasibility_restore(const ModelParams& params, double s,
                                  double alpha, double delta,
                                  const RestoreOptions& options) {
  params.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("feasibility_restore: alpha must lie in (0, 1)");
  }
  if (!(s > 0.0)) throw ConfigError("feasibility_restore: s must be positive");
  if (delta < 0.0) throw ConfigError("feasibility_restore: delta must be >= 0");
  const double one_minus_a2 = 1.0 - alpha * alpha;
  if (delta * delta > one_minus_a2 * s * s) {
    throw ConfigError(
        "feasibility_restore: delta^2 <= (1 - alpha^2) s^2 must hold for the "
        "fixed (s, alpha); the scalar condition is independent of theta");
  }

  const Index n = params.dims.n, m = params.dims.m;
  SdpProblem problem;
  const Index vP = problem.add_scalars("P", tri_count(n));
  const Index vL =
      options.pin_l_zero ? -1 : problem.add_scalars("L", m * n);
  const Index vM = problem.add_scalars("M", m);
  const Index num_vars = problem.num_variables();

  const auto make_cert = [&](const Vec& x) {
    Certificate cert;
    cert.P = sym_from_segment(x, vP, n);
    cert.L = options.pin_l_zero ? Mat::Zero(m, n)
                                : mat_from_segment(x, vL, m, n);
    cert.m_diag = x.segment(vM, m);
    cert.s = s;
    cert.alpha = alpha;
    return cert;
  };

  const Index lmi_f = problem.add_lmi("F", 2 * n + params.dims.r + m);
  register_affine_block(
      problem, lmi_f,
      [&](const Vec& x) -> Mat {
        Mat F = -build_F(params, make_cert(x));
        F.diagonal().array() -= options.margin;
        return F;
      },
      num_vars);
  for (Index i = 0; i < m; ++i) {
    const Index lmi_g = problem.add_lmi("G" + std::to_string(i + 1), 1 + n);
    register_affine_block(
        problem, lmi_g,
        [&, i](const Vec& x) -> Mat {
          Mat G = build_G(make_cert(x), i);
          G.diagonal().array() -= options.margin;
          return G;
        },
        num_vars);
  }
  register_pm_bounds(problem, vP, vM, n, m, options.m_floor, num_vars);
  maybe_dump(problem, options.dump_path);

  Vec x0 = Vec::Zero(num_vars);
  pack_sym(x0, vP, Mat::Identity(n, n));
  x0.segment(vM, m).setOnes();
  if (options.warm_start && options.warm_start->P.rows() == n &&
      options.warm_start->m_diag.size() == m) {
    const Certificate& w = *options.warm_start;
    pack_sym(x0, vP, 0.5 * (w.P + w.P.transpose()));
    if (!options.pin_l_zero && w.L.rows() == m && w.L.cols() == n) {
      Index k = vL;
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) x0[k++] = w.L(i, j);
      }
    }
    x0.segment(vM, m) =
        w.m_diag.cwiseMax(Vec::Constant(m, 2.0 * options.m_floor));
  }

  const SdpSolution sol = solve_feasibility(problem, x0, options.solver);
  RestoreResult result;
  result.status = sol.status;
  result.info = run_info(sol, options.solver);
  if (sol.status == SdpStatus::optimal) {
    result.certificate = make_cert(sol.x);
  }
  return result;
}

Initialization initialize(const Dimensions& dims, double delta,
                          std::optional<double> beta, std::uint64_t seed,
                          const InitializeOptions& options) {
  dims.validate();
  if (dims.e > dims.n) {
    throw ConfigError("initialize: the prescribed C = [I 0] needs e <= n");
  }
  if (!(delta > 0.0)) throw ConfigError("initialize: delta must be positive");

  const Index n = dims.n, r = dims.r, e = dims.e, m = dims.m;
  const double alpha = 0.99;
  const double one_minus_a2 = 1.0 - alpha * alpha;
  const double s =
      (1.0 + options.eps_s) * std::sqrt(delta * delta / one_minus_a2);

  ModelParams base = ModelParams::zero(dims);
  base.A = 0.9 * Mat::Identity(n, n);
  base.C.leftCols(e) = Mat::Identity(e, e);
  CounterRng rng(seed, /*stream=*/1);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) base.C2(i, j) = rng.uniform(-1.0, 1.0);
  }

  SdpProblem problem;
  const Index vP = problem.add_scalars("P", tri_count(n));
  const Index vL = options.pin_l_zero ? -1 : problem.add_scalars("L", m * n);
  const Index vM = problem.add_scalars("M", m);
  const Index vB = problem.add_scalars("B", n * r);
  const Index vD21 = problem.add_scalars("D21", m * r);
  const Index num_vars = problem.num_variables();

  const auto make_parts = [&](const Vec& x) {
    ModelParams params = base;
    params.B = mat_from_segment(x, vB, n, r);
    params.D21 = mat_from_segment(x, vD21, m, r);
    Certificate cert;
    cert.P = sym_from_segment(x, vP, n);
    cert.L =
        options.pin_l_zero ? Mat::Zero(m, n) : mat_from_segment(x, vL, m, n);
    cert.m_diag = x.segment(vM, m);
    cert.s = s;
    cert.alpha = alpha;
    return std::make_pair(params, cert);
  };

  const Index lmi_f = problem.add_lmi("F", 2 * n + r + m);
  register_affine_block(
      problem, lmi_f,
      [&](const Vec& x) -> Mat {
        const auto [params, cert] = make_parts(x);
        Mat F = -build_F(params, cert);
        F.diagonal().array() -= options.margin;
        return F;
      },
      num_vars);
  for (Index i = 0; i < m; ++i) {
    const Index lmi_g = problem.add_lmi("G" + std::to_string(i + 1), 1 + n);
    register_affine_block(
        problem, lmi_g,
        [&, i](const Vec& x) -> Mat {
          Mat G = build_G(make_parts(x).second, i);
          G.diagonal().array() -= options.margin;
          return G;
        },
        num_vars);
  }
  register_pm_bounds(problem, vP, vM, n, m, options.m_floor, num_vars);
  if (beta && *beta > 0.0) {
    const Index lmi_ball = problem.add_lmi("ball", n);
    const double ratio = (*beta) * (*beta) / (s * s);
    register_affine_block(
        problem, lmi_ball,
        [&](const Vec& x) -> Mat {
          return sym_from_segment(x, vP, n) - ratio * Mat::Identity(n, n);
        },
        num_vars);
  }
  maybe_dump(problem, options.dump_path);

  // The recipe admits a closed-form strictly feasible point: with B2 = 0 and
  // L = -C2 P the off-diagonal F couplings vanish, and F ⪯ 0 reduces to the
  // A-contraction condition, which P = tau I satisfies for any tau > 0 since
  // |A|_2 = 0.9 < alpha. The region LMIs bound tau from above via
  // tau |c2_i|^2 <= 1/s^2, the optional ball from below. A well-scaled P
  // also matters downstream: the trainer takes this point as its starting
  // iterate, and a P orders of magnitude above the data scale cannot be
  // re-normalized by bounded-step gradient updates. When the ladder below
  // finds no admissible tau the solver simply starts from P = I.
  double c2_row_sq = 0.25;
  for (Index i = 0; i < m; ++i) {
    c2_row_sq = std::max(c2_row_sq, base.C2.row(i).squaredNorm());
  }
  const double tau_cap = std::min(0.5 / (s * s * c2_row_sq), 0.05);
  const double tau_floor =
      std::max(20.0 * options.margin,
               beta && *beta > 0.0
                   ? (*beta) * (*beta) / (s * s) + 2.0 * options.margin
                   : 0.0);

  Vec x0 = Vec::Zero(num_vars);
  x0.segment(vM, m).setOnes();
  if (tau_floor <= tau_cap) {
    const double tau = tau_cap;
    pack_sym(x0, vP, tau * Mat::Identity(n, n));
    if (!options.pin_l_zero) {
      const Mat L0 = -tau * base.C2;
      Index k = vL;
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) x0[k++] = L0(i, j);
      }
    }
  } else {
    pack_sym(x0, vP, Mat::Identity(n, n));
  }

  const SdpSolution sol = solve_feasibility(problem, x0, options.solver);
  if (sol.status != SdpStatus::optimal) {
    throw InfeasibleError(
        "initialize: the construction should always be feasible, but the "
        "solver reported " +
        std::string(to_string(sol.status)) + " (" + sol.message + ")");
  }

  Initialization init;
  std::tie(init.params, init.certificate) = make_parts(sol.x);
  init.info = run_info(sol, options.solver);

  const auto report = check_certificate(init.params, init.certificate, delta);
  if (!report.passed()) {
    throw NumericalError(
        "initialize: solver returned a point that fails certificate "
        "verification");
  }
  return init;
}

PostProcessResult post_process(const ModelParams& params, double alpha,
                               double delta,
                               const PostProcessOptions& options) {
  params.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("post_process: alpha must lie in (0, 1)");
  }
  if (delta < 0.0) throw ConfigError("post_process: delta must be >= 0");
  if (!(options.s_max > 0.0)) {
    throw ConfigError("post_process: s_max must be positive");
  }

  const Index n = params.dims.n, m = params.dims.m;
  const double one_minus_a2 = 1.0 - alpha * alpha;
  const double s_hat_floor = 1.0 / (options.s_max * options.s_max);

  SdpProblem problem;
  const Index vP = problem.add_scalars("P", tri_count(n));
  const Index vL = problem.add_scalars("L", m * n);
  const Index vM = problem.add_scalars("M", m);
  const Index vS = problem.add_scalars("s_hat", 1);
  const Index num_vars = problem.num_variables();

  const auto make_cert = [&](const Vec& x, double s_value) {
    Certificate cert;
    cert.P = sym_from_segment(x, vP, n);
    cert.L = mat_from_segment(x, vL, m, n);
    cert.m_diag = x.segment(vM, m);
    cert.s = s_value;
    cert.alpha = alpha;
    return cert;
  };

  const Index lmi_f = problem.add_lmi("F", 2 * n + params.dims.r + m);
  register_affine_block(
      problem, lmi_f,
      [&](const Vec& x) -> Mat { return -build_F(params, make_cert(x, 1.0)); },
      num_vars);
  // Region blocks with the variable s_hat in the corner: affine, unlike 1/s^2.
  for (Index i = 0; i < m; ++i) {
    const Index lmi_g = problem.add_lmi("G" + std::to_string(i + 1), 1 + n);
    register_affine_block(
        problem, lmi_g,
        [&, i](const Vec& x) -> Mat {
          Mat G(1 + n, 1 + n);
          const Mat L = mat_from_segment(x, vL, m, n);
          G(0, 0) = x[vS];
          G.block(0, 1, 1, n) = L.row(i);
          G.block(1, 0, n, 1) = L.row(i).transpose();
          G.block(1, 1, n, n) = sym_from_segment(x, vP, n);
          return G;
        },
        num_vars);
  }
  register_pm_bounds(problem, vP, vM, n, m, options.m_floor, num_vars);
  {
    const Index lmi_delta = problem.add_lmi("input_bound", 1);
    register_affine_block(
        problem, lmi_delta,
        [&](const Vec& x) {
          return Mat::Constant(1, 1, one_minus_a2 - delta * delta * x[vS]);
        },
        num_vars);
    const Index lmi_cap = problem.add_lmi("scale_cap", 1);
    register_affine_block(
        problem, lmi_cap,
        [&](const Vec& x) {
          return Mat::Constant(1, 1, x[vS] - s_hat_floor);
        },
        num_vars);
    const Index lmi_sbox = problem.add_lmi("s_box", 1);
    register_affine_block(
        problem, lmi_sbox,
        [&](const Vec& x) { return Mat::Constant(1, 1, kBoxCap - x[vS]); },
        num_vars);
  }
  Vec c = Vec::Zero(num_vars);
  c[vS] = 1.0;
  problem.set_objective(c);
  maybe_dump(problem, options.dump_path);

  Vec x0 = Vec::Zero(num_vars);
  pack_sym(x0, vP, Mat::Identity(n, n));
  x0.segment(vM, m).setOnes();
  double s_hat0 = delta > 0.0 ? 0.5 * one_minus_a2 / (delta * delta) : 1.0;
  s_hat0 = std::max(std::min(s_hat0, 1.0), 2.0 * s_hat_floor);
  x0[vS] = s_hat0;

  const SdpSolution sol = solve(problem, x0, options.solver);
  PostProcessResult result;
  result.status = sol.status;
  result.info = run_info(sol, options.solver);
  if (sol.status == SdpStatus::optimal) {
    result.s_hat = sol.x[vS];
    result.certificate = make_cert(sol.x, 1.0 / std::sqrt(sol.x[vS]));
  }
  return result;
}

}  // namespace luresid::sdp
