#include "luresid/sdp/solver.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace luresid::sdp {

const char* to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

enum class CenterOutcome { converged, early_exit, budget_exhausted, failure };

bool factorize_all(const SdpProblem& problem, const Vec& x,
                   std::vector<Eigen::LLT<Mat>>* out = nullptr,
                   double* logdet = nullptr) {
  if (out) out->clear();
  if (logdet) *logdet = 0.0;
  for (Index j = 0; j < problem.num_lmis(); ++j) {
    Eigen::LLT<Mat> llt(problem.eval(j, x));
    if (llt.info() != Eigen::Success) return false;
    if (logdet) {
      *logdet += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    if (out) out->push_back(std::move(llt));
  }
  return true;
}

/// Damped Newton minimization of t*c'x - sum_j log det A_j(x) starting from
/// a strictly feasible x (in place). The optional callback runs after every
/// accepted step and stops the stage when it returns true.
CenterOutcome center(const SdpProblem& problem, Vec& x, double t, const Vec& c,
                     const SdpSettings& settings, int& budget, int& used,
                     const std::function<bool(const Vec&)>& early_exit = {}) {
  const Index p = problem.num_variables();
  std::vector<Eigen::LLT<Mat>> llts;

  for (int stage_iter = 0; stage_iter < settings.max_newton_per_stage;
       ++stage_iter) {
    if (budget <= 0) return CenterOutcome::budget_exhausted;

    double logdet = 0.0;
    if (!factorize_all(problem, x, &llts, &logdet)) {
      return CenterOutcome::failure;  // iterates must stay interior
    }
    const double f0 = t * (c.size() ? c.dot(x) : 0.0) - logdet;

    Vec g = c.size() ? Vec(t * c) : Vec(Vec::Zero(p));
    Mat H = Mat::Zero(p, p);
    for (Index j = 0; j < problem.num_lmis(); ++j) {
      const auto& coeffs = problem.coefficients(j);
      if (coeffs.empty()) continue;
      const auto& L = llts[static_cast<std::size_t>(j)].matrixL();
      std::vector<std::pair<Index, Mat>> whitened;
      whitened.reserve(coeffs.size());
      for (const auto& [var, A] : coeffs) {
        Mat Y = L.solve(A);
        Mat U = L.solve(Y.transpose()).transpose();
        g[var] -= U.trace();
        whitened.emplace_back(var, std::move(U));
      }
      for (std::size_t a = 0; a < whitened.size(); ++a) {
        for (std::size_t b = a; b < whitened.size(); ++b) {
          const double hv =
              whitened[a].second.cwiseProduct(whitened[b].second).sum();
          H(whitened[a].first, whitened[b].first) += hv;
          if (whitened[a].first != whitened[b].first) {
            H(whitened[b].first, whitened[a].first) += hv;
          }
        }
      }
    }

    // Newton direction with escalating ridge if the Hessian is marginal.
    Vec delta;
    double lambda2 = -1.0;
    double ridge = 0.0;
    const double base = std::max(H.diagonal().maxCoeff(), 1e-12);
    for (int attempt = 0; attempt < 8; ++attempt) {
      Mat Hr = H;
      if (ridge > 0.0) Hr.diagonal().array() += ridge;
      Eigen::LDLT<Mat> ldlt(Hr);
      if (ldlt.info() == Eigen::Success) {
        delta = ldlt.solve(-g);
        lambda2 = -g.dot(delta);
        if (std::isfinite(lambda2) && lambda2 >= 0.0 &&
            delta.allFinite()) {
          break;
        }
      }
      lambda2 = -1.0;
      ridge = ridge == 0.0 ? 1e-14 * base : ridge * 100.0;
    }
    if (lambda2 < 0.0) return CenterOutcome::failure;
    if (0.5 * lambda2 < settings.newton_tol) return CenterOutcome::converged;

    // Backtracking: stay interior, then require sufficient decrease. The
    // relative slack keeps the test meaningful when t*c'x dwarfs the
    // decrement and the comparison would otherwise drown in rounding.
    const double armijo_slack = 1e-14 * (1.0 + std::abs(f0));
    double step = 1.0;
    bool accepted = false;
    Vec xc;
    while (step >= 1e-14) {
      xc = x + step * delta;
      double logdet_c = 0.0;
      if (factorize_all(problem, xc, nullptr, &logdet_c)) {
        const double fc = t * (c.size() ? c.dot(xc) : 0.0) - logdet_c;
        if (fc <= f0 - 0.25 * step * lambda2 + armijo_slack) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) return CenterOutcome::converged;  // stalled at precision

    x = xc;
    --budget;
    ++used;
    if (early_exit && early_exit(x)) return CenterOutcome::early_exit;
  }
  return CenterOutcome::converged;
}

double total_dimension(const SdpProblem& problem) {
  double d = 0;
  for (Index j = 0; j < problem.num_lmis(); ++j) {
    d += static_cast<double>(problem.lmi_dim(j));
  }
  return d;
}

std::string indefinite_block_names(const SdpProblem& problem, const Vec& x) {
  std::string names;
  for (Index j = 0; j < problem.num_lmis(); ++j) {
    Eigen::LLT<Mat> llt(problem.eval(j, x));
    if (llt.info() != Eigen::Success) {
      if (!names.empty()) names += ", ";
      names += problem.lmi_name(j);
    }
  }
  return names.empty() ? "(none)" : names;
}

}  // namespace

SdpSolution solve_feasibility(const SdpProblem& problem, const Vec& x0,
                              const SdpSettings& settings) {
  SdpSolution sol;
  if (x0.size() != problem.num_variables()) {
    sol.message = "warm start size does not match variable count";
    return sol;
  }

  if (factorize_all(problem, x0)) {
    sol.status = SdpStatus::optimal;
    sol.x = x0;
    sol.phase1_slack = 0.0;
    sol.gap = 0.0;
    sol.message = "warm start already strictly feasible";
    return sol;
  }

  // Augmented problem: minimize the shared slack tau with A_j(x) + tau*I >= 0
  // and -1 <= tau <= tau0 + 10. The bounds keep the phase-1 feasible set
  // bounded in tau; margins beyond 1 are never needed because required
  // margins are already embedded in the blocks themselves.
  SdpProblem aug = problem;
  const Index p = problem.num_variables();
  const Index tau = aug.add_scalars("__slack", 1);
  for (Index j = 0; j < problem.num_lmis(); ++j) {
    const Index dim = problem.lmi_dim(j);
    aug.add_coefficient(j, tau, Mat::Identity(dim, dim));
  }
  double tau0 = 0.0;
  for (Index j = 0; j < problem.num_lmis(); ++j) {
    Eigen::SelfAdjointEigenSolver<Mat> es(problem.eval(j, x0));
    tau0 = std::max(tau0, -es.eigenvalues().minCoeff());
  }
  tau0 += 1.0;
  {
    const Index lower = aug.add_lmi("__slack_lower", 1);
    aug.set_constant(lower, Mat::Constant(1, 1, 1.0));
    aug.add_coefficient(lower, tau, Mat::Constant(1, 1, 1.0));
    const Index upper = aug.add_lmi("__slack_upper", 1);
    aug.set_constant(upper, Mat::Constant(1, 1, tau0 + 10.0));
    aug.add_coefficient(upper, tau, Mat::Constant(1, 1, -1.0));
  }
  Vec c = Vec::Zero(p + 1);
  c[tau] = 1.0;

  Vec xa(p + 1);
  xa.head(p) = x0;
  xa[tau] = tau0;

  const auto original_feasible = [&problem, p](const Vec& point) {
    return factorize_all(problem, Vec(point.head(p)));
  };

  int budget = settings.max_iterations;
  int used = 0;
  const double dims = total_dimension(aug);
  double t = 1.0;
  for (int stage = 0; stage < 256; ++stage) {
    const CenterOutcome outcome =
        center(aug, xa, t, c, settings, budget, used, original_feasible);
    sol.newton_iterations = used;
    sol.phase1_slack = xa[tau];
    if (outcome == CenterOutcome::early_exit) {
      sol.status = SdpStatus::optimal;
      sol.x = xa.head(p);
      sol.gap = 0.0;
      sol.message = "strictly feasible point found";
      return sol;
    }
    if (outcome == CenterOutcome::failure) {
      sol.message = "phase-1 Newton breakdown";
      return sol;
    }
    if (outcome == CenterOutcome::budget_exhausted) {
      sol.message = "phase-1 iteration budget exhausted";
      return sol;
    }
    if (dims / t <= settings.tolerance) break;
    t *= settings.mu;
  }

  // Slack could not be driven below zero: certified up to the gap accuracy.
  sol.status = SdpStatus::infeasible;
  sol.gap = dims / t;
  sol.message = "no strictly feasible point; min slack " +
                std::to_string(xa[tau]) + "; indefinite blocks at endpoint: " +
                indefinite_block_names(problem, Vec(xa.head(p)));
  return sol;
}

SdpSolution solve(const SdpProblem& problem, const Vec& x0,
                  const SdpSettings& settings) {
  SdpSolution sol = solve_feasibility(problem, x0, settings);
  if (sol.status != SdpStatus::optimal) return sol;
  if (problem.objective().size() == 0) return sol;

  const Vec& c = problem.objective();
  Vec x = sol.x;
  int budget = settings.max_iterations - sol.newton_iterations;
  int used = sol.newton_iterations;
  const double dims = total_dimension(problem);

  double t = 1.0;
  for (int stage = 0; stage < 256; ++stage) {
    const CenterOutcome outcome =
        center(problem, x, t, c, settings, budget, used);
    if (outcome == CenterOutcome::failure) {
      sol.status = SdpStatus::numerical_failure;
      sol.newton_iterations = used;
      sol.message = "path-following Newton breakdown at t = " +
                    std::to_string(t);
      return sol;
    }
    if (outcome == CenterOutcome::budget_exhausted) {
      sol.status = SdpStatus::numerical_failure;
      sol.newton_iterations = used;
      sol.message = "iteration budget exhausted at t = " + std::to_string(t);
      return sol;
    }
    sol.gap = dims / t;
    if (sol.gap <= settings.tolerance) break;
    t *= settings.mu;
  }

  sol.status = SdpStatus::optimal;
  sol.x = x;
  sol.objective = c.dot(x);
  sol.newton_iterations = used;
  sol.message = "optimal within gap " + std::to_string(sol.gap);
  return sol;
}

}  // namespace luresid::sdp
