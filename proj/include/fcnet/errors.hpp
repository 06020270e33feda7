#pragma once

#include <stdexcept>
#include <string>

namespace fcnet {

/// Raised when an input (pmf, routing policy, scenario file, ...) violates a
/// structural invariant. The CLI maps this to exit code 2.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a model is structurally valid but has no stable/feasible
/// operating point (rho >= 1, singular traffic system, ...). Exit code 3.
struct infeasible_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative solver runs out of budget. Exit code 4.
struct nonconvergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fcnet
