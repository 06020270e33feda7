#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcnet/errors.hpp"
#include "fcnet/pmf.hpp"

namespace fcnet {

/// A finite function table f : X_1 x ... x X_k -> Y together with a joint
/// source distribution over the input tuples. Outputs and probabilities are
/// stored row-major over the input product space (last source fastest).
class FunctionTable {
 public:
  FunctionTable(std::vector<std::vector<std::string>> alphabets,
               std::vector<std::string> outputs, std::vector<double> joint_probs)
      : alphabets_(std::move(alphabets)),
        outputs_(std::move(outputs)),
        joint_(make_shape(alphabets_), std::move(joint_probs)) {
    if (outputs_.size() != joint_.probs().size())
      throw validation_error("function table: output count does not match input space");
  }

  std::size_t arity() const { return alphabets_.size(); }
  const std::vector<std::string>& alphabet(std::size_t source) const {
    if (source >= alphabets_.size())
      throw validation_error("function table: source index out of range");
    return alphabets_[source];
  }
  const JointPmf& joint() const { return joint_; }

  const std::string& value(std::span<const std::size_t> tuple) const {
    return outputs_[joint_.flat_index(tuple)];
  }
  const std::string& value_flat(std::size_t flat) const { return outputs_.at(flat); }

  /// Marginal pmf of one source, with its symbol names attached.
  Pmf marginal(std::size_t source) const {
    return Pmf(alphabet(source), joint_.marginal(source));
  }

 private:
  static std::vector<std::size_t> make_shape(
      const std::vector<std::vector<std::string>>& alphabets) {
    if (alphabets.empty()) throw validation_error("function table: arity zero");
    std::vector<std::size_t> shape;
    shape.reserve(alphabets.size());
    for (const auto& a : alphabets) {
      if (a.empty()) throw validation_error("function table: empty alphabet");
      shape.push_back(a.size());
    }
    return shape;
  }

  std::vector<std::vector<std::string>> alphabets_;
  std::vector<std::string> outputs_;
  JointPmf joint_;
};

}  // namespace fcnet
