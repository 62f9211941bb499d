#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace luresid {

template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = MatX<double>;
using Vec = VecX<double>;
using Index = Eigen::Index;

/// Caller-side misuse: inconsistent shapes, invalid hyperparameters, bad flags.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input files (JSON schema, truncation, I/O).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A constraint system admits no solution (distinct from solver breakdown).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: singular factorizations, non-finite values, solver
/// failure that is not a proof of infeasibility.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Model size metadata: n states, r inputs, e outputs, m nonlinearity
/// channels. The deadzone is applied elementwise, so the number of
/// nonlinearity outputs equals m.
struct Dimensions {
  Index n = 0;
  Index r = 0;
  Index e = 0;
  Index m = 0;

  void validate() const {
    if (n < 1 || r < 1 || e < 1 || m < 1) {
      throw ConfigError("Dimensions: all of n, r, e, m must be >= 1 (got n=" +
                        std::to_string(n) + " r=" + std::to_string(r) + " e=" +
                        std::to_string(e) + " m=" + std::to_string(m) + ")");
    }
  }

  bool operator==(const Dimensions&) const = default;
};

}  // namespace luresid
