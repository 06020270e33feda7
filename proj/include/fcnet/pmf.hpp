#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fcnet/errors.hpp"

namespace fcnet {

inline constexpr double kPmfSumTol = 1e-12;

/// -sum p log2 p over a raw probability sequence, with 0 log 0 = 0.
inline double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

/// Probability mass function over a finite, named alphabet.
class Pmf {
 public:
  Pmf(std::vector<std::string> support, std::vector<double> probs)
      : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.size() != probs_.size())
      throw validation_error("pmf: support and probability sizes differ");
    if (support_.empty()) throw validation_error("pmf: empty support");
    std::unordered_set<std::string> seen;
    for (const auto& s : support_)
      if (!seen.insert(s).second)
        throw validation_error("pmf: duplicate symbol '" + s + "'");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw validation_error("pmf: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfSumTol)
      throw validation_error("pmf: probabilities sum to " + std::to_string(sum));
  }

  std::size_t size() const { return probs_.size(); }
  const std::vector<std::string>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }
  double prob(std::size_t i) const { return probs_.at(i); }
  const std::string& symbol(std::size_t i) const { return support_.at(i); }

 private:
  std::vector<std::string> support_;
  std::vector<double> probs_;
};

/// Shannon entropy of a pmf in bits.
inline double source_entropy(const Pmf& pmf) { return entropy_bits(pmf.probs()); }

/// Joint distribution over a product of finite alphabets, stored row-major
/// (last axis fastest). Axes are identified by position only; symbol names
/// live in FunctionTable.
class JointPmf {
 public:
  JointPmf(std::vector<std::size_t> shape, std::vector<double> probs)
      : shape_(std::move(shape)), probs_(std::move(probs)) {
    std::size_t cells = 1;
    for (std::size_t n : shape_) {
      if (n == 0) throw validation_error("joint pmf: empty axis");
      cells *= n;
    }
    if (shape_.empty()) throw validation_error("joint pmf: no axes");
    if (probs_.size() != cells)
      throw validation_error("joint pmf: cell count does not match shape");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw validation_error("joint pmf: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfSumTol)
      throw validation_error("joint pmf: probabilities sum to " + std::to_string(sum));
  }

  std::size_t arity() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<double>& probs() const { return probs_; }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    if (idx.size() != shape_.size())
      throw validation_error("joint pmf: tuple arity mismatch");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] >= shape_[a]) throw validation_error("joint pmf: index out of range");
      flat = flat * shape_[a] + idx[a];
    }
    return flat;
  }

  double prob(std::span<const std::size_t> idx) const { return probs_[flat_index(idx)]; }

  /// Marginal probabilities along one axis.
  std::vector<double> marginal(std::size_t axis) const {
    if (axis >= shape_.size()) throw validation_error("joint pmf: axis out of range");
    std::vector<double> out(shape_[axis], 0.0);
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < shape_.size(); ++a) inner *= shape_[a];
    const std::size_t axis_n = shape_[axis];
    for (std::size_t i = 0; i < probs_.size(); ++i)
      out[(i / inner) % axis_n] += probs_[i];
    return out;
  }

  double joint_entropy_bits() const { return entropy_bits(probs_); }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> probs_;
};

/// Distributed-coding rate region membership for a two-source joint pmf:
/// r1 >= H(X1|X2), r2 >= H(X2|X1), r1 + r2 >= H(X1,X2). Boundary points are
/// members; a small slack absorbs rounding in the entropy evaluations.
inline bool slepian_wolf_member(double r1, double r2, const JointPmf& joint) {
  if (joint.arity() != 2) throw validation_error("rate region: joint pmf must be 2-source");
  if (r1 < 0.0 || r2 < 0.0) throw validation_error("rate region: negative rate");
  const double h12 = joint.joint_entropy_bits();
  const double h1 = entropy_bits(joint.marginal(0));
  const double h2 = entropy_bits(joint.marginal(1));
  const double slack = 1e-12;
  return r1 >= h12 - h2 - slack && r2 >= h12 - h1 - slack && r1 + r2 >= h12 - slack;
}

}  // namespace fcnet
