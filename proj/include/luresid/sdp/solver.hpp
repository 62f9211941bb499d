#pragma once

#include <limits>
#include <string>

#include "luresid/sdp/problem.hpp"
#include "luresid/types.hpp"

namespace luresid::sdp {

/// Settings for the log-det barrier interior-point method. Recorded in run
/// outputs so results are reproducible.
struct SdpSettings {
  double tolerance = 1e-9;       // duality-gap target for path following
  int max_iterations = 100000;   // total Newton step budget
  double mu = 10.0;              // barrier parameter growth per stage
  double newton_tol = 1e-10;     // stage stop: squared decrement / 2 below
  int max_newton_per_stage = 250;
};

enum class SdpStatus { optimal, infeasible, numerical_failure };

[[nodiscard]] const char* to_string(SdpStatus status);

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  Vec x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::infinity();
  /// Final value of the phase-1 slack (negative means a strictly feasible
  /// point was found; positive certifies infeasibility at the gap accuracy).
  double phase1_slack = std::numeric_limits<double>::quiet_NaN();
  int newton_iterations = 0;
  std::string message;
};

/// Finds a strictly feasible point (all blocks positive definite) by
/// minimizing a shared slack, exiting as soon as strict feasibility holds.
/// `x0` is a shape hint and warm start; it need not be feasible.
SdpSolution solve_feasibility(const SdpProblem& problem, const Vec& x0,
                              const SdpSettings& settings = {});

/// Phase-1 feasibility followed by path-following minimization of the
/// problem's linear objective. For problems without an objective this is
/// identical to solve_feasibility.
SdpSolution solve(const SdpProblem& problem, const Vec& x0,
                  const SdpSettings& settings = {});

}  // namespace luresid::sdp
