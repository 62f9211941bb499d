#include "luresid/sdp/problem.hpp"

#include <json.hpp>

namespace luresid::sdp {

Index SdpProblem::add_scalars(const std::string& name, Index count) {
  if (count < 1) throw ConfigError("SdpProblem: variable count must be >= 1");
  const Index first = num_variables();
  for (Index k = 0; k < count; ++k) {
    variable_names_.push_back(count == 1 ? name
                                         : name + "[" + std::to_string(k) + "]");
  }
  return first;
}

Index SdpProblem::add_lmi(const std::string& name, Index dim) {
  if (dim < 1) throw ConfigError("SdpProblem: LMI dimension must be >= 1");
  Block b;
  b.name = name;
  b.constant = Mat::Zero(dim, dim);
  blocks_.push_back(std::move(b));
  return num_lmis() - 1;
}

void SdpProblem::set_constant(Index lmi, Mat constant) {
  auto& block = blocks_.at(static_cast<std::size_t>(lmi));
  if (constant.rows() != block.constant.rows() ||
      constant.cols() != block.constant.cols()) {
    throw ConfigError("SdpProblem: constant shape mismatch for block " +
                      block.name);
  }
  block.constant = std::move(constant);
}

void SdpProblem::add_coefficient(Index lmi, Index var, const Mat& coeff) {
  auto& block = blocks_.at(static_cast<std::size_t>(lmi));
  if (var < 0 || var >= num_variables()) {
    throw ConfigError("SdpProblem: coefficient for undeclared variable");
  }
  if (coeff.rows() != block.constant.rows() ||
      coeff.cols() != block.constant.cols()) {
    throw ConfigError("SdpProblem: coefficient shape mismatch for block " +
                      block.name);
  }
  for (auto& [v, m] : block.coefficients) {
    if (v == var) {
      m += coeff;
      return;
    }
  }
  block.coefficients.emplace_back(var, coeff);
}

void SdpProblem::set_objective(Vec c) {
  if (c.size() != 0 && c.size() != num_variables()) {
    throw ConfigError("SdpProblem: objective size mismatch");
  }
  objective_ = std::move(c);
}

Mat SdpProblem::eval(Index lmi, const Vec& x) const {
  if (x.size() != num_variables()) {
    throw ConfigError("SdpProblem: point size mismatch in eval");
  }
  const auto& block = blocks_.at(static_cast<std::size_t>(lmi));
  Mat A = block.constant;
  for (const auto& [var, coeff] : block.coefficients) {
    A += x[var] * coeff;
  }
  return A;
}

namespace {

nlohmann::json triplets(const Mat& M) {
  nlohmann::json t = nlohmann::json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (M(i, j) != 0.0) t.push_back({i, j, M(i, j)});
    }
  }
  return t;
}

}  // namespace

nlohmann::json SdpProblem::dump() const {
  nlohmann::json j;
  j["variables"] = variable_names_;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : blocks_) {
    nlohmann::json jb;
    jb["name"] = b.name;
    jb["dim"] = b.constant.rows();
    jb["constant"] = triplets(b.constant);
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [var, m] : b.coefficients) {
      coeffs.push_back({{"variable", var}, {"entries", triplets(m)}});
    }
    jb["coefficients"] = std::move(coeffs);
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  if (objective_.size() > 0) {
    std::vector<double> c(objective_.data(), objective_.data() + objective_.size());
    j["objective"] = c;
  }
  return j;
}

}  // namespace luresid::sdp
