#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "luresid/types.hpp"

namespace luresid::sdp {

/// Conic problem in the form
///
///   minimize    c' x
///   subject to  A_j(x) = C_j + sum_i x_i A_{j,i}  >=  0   (PSD), all j,
///
/// over scalar decision variables x. Matrix-shaped variables (symmetric
/// blocks, diagonals) are flattened to scalars by the callers, which build
/// coefficient matrices by evaluating their affine assembly maps at unit
/// vectors. Constraints of the form F(x) <= -margin*I enter as
/// -F(x) - margin*I >= 0.
class SdpProblem {
 public:
  /// Declares `count` scalar variables; returns the index of the first.
  Index add_scalars(const std::string& name, Index count);

  /// Declares an LMI block of size dim x dim, initially identically zero.
  Index add_lmi(const std::string& name, Index dim);

  void set_constant(Index lmi, Mat constant);

  /// Accumulates a coefficient matrix for variable `var` in block `lmi`.
  void add_coefficient(Index lmi, Index var, const Mat& coeff);

  /// Linear objective; an empty vector means pure feasibility.
  void set_objective(Vec c);

  [[nodiscard]] Index num_variables() const {
    return static_cast<Index>(variable_names_.size());
  }
  [[nodiscard]] Index num_lmis() const {
    return static_cast<Index>(blocks_.size());
  }
  [[nodiscard]] Index lmi_dim(Index lmi) const {
    return blocks_.at(static_cast<std::size_t>(lmi)).constant.rows();
  }
  [[nodiscard]] const std::string& lmi_name(Index lmi) const {
    return blocks_.at(static_cast<std::size_t>(lmi)).name;
  }
  [[nodiscard]] const Vec& objective() const { return objective_; }

  [[nodiscard]] const Mat& constant(Index lmi) const {
    return blocks_.at(static_cast<std::size_t>(lmi)).constant;
  }
  [[nodiscard]] const std::vector<std::pair<Index, Mat>>& coefficients(
      Index lmi) const {
    return blocks_.at(static_cast<std::size_t>(lmi)).coefficients;
  }

  /// A_j(x) for block j at the point x.
  [[nodiscard]] Mat eval(Index lmi, const Vec& x) const;

  /// Self-describing export (variables, blocks as sparse triplets,
  /// objective) for external cross-checking.
  [[nodiscard]] nlohmann::json dump() const;

 private:
  struct Block {
    std::string name;
    Mat constant;
    std::vector<std::pair<Index, Mat>> coefficients;
  };

  std::vector<std::string> variable_names_;
  std::vector<Block> blocks_;
  Vec objective_;
};

}  // namespace luresid::sdp
