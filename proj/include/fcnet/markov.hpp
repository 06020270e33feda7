#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fcnet/errors.hpp"
#include "fcnet/linalg.hpp"

namespace fcnet {

struct StationaryOptions {
  int max_iters = 1000000;
  double damping = 0.999;  // lazy-chain mixing; preserves the fixed point
};

inline void check_stochastic(const Mat& P) {
  if (P.rows != P.cols || P.rows == 0)
    throw validation_error("markov: transition matrix must be square");
  for (std::size_t i = 0; i < P.rows; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < P.cols; ++j) {
      if (P(i, j) < -1e-12) throw validation_error("markov: negative transition probability");
      row += P(i, j);
    }
    if (std::abs(row - 1.0) > 1e-9)
      throw validation_error("markov: row " + std::to_string(i) + " sums to " +
                             std::to_string(row));
  }
}

inline bool is_irreducible(const Mat& P) {
  const std::size_t n = P.rows;
  auto reachable = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        const double p = forward ? P(u, v) : P(v, u);
        if (p > 0.0 && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    for (bool s : seen)
      if (!s) return false;
    return true;
  };
  return reachable(true) && reachable(false);
}

/// Stationary distribution pi with pi P = pi, found by power iteration on the
/// damped chain d*P + (1-d)*I, which shares the fixed point but cannot be
/// periodic. Requires an irreducible chain.
inline std::vector<double> stationary_distribution(const Mat& P, double tol = 1e-12,
                                                   const StationaryOptions& opts = {}) {
  check_stochastic(P);
  if (!is_irreducible(P)) throw validation_error("markov: chain is reducible");
  const std::size_t n = P.rows;
  const double d = opts.damping;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
  for (int it = 0; it < opts.max_iters; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = (1.0 - d) * pi[j];
      for (std::size_t i = 0; i < n; ++i) s += d * pi[i] * P(i, j);
      next[j] = s;
    }
    double norm = 0.0;
    for (double x : next) norm += x;
    for (double& x : next) x /= norm;
    // convergence is judged against the undamped chain
    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += next[i] * P(i, j);
      residual = std::max(residual, std::abs(s - next[j]));
    }
    pi.swap(next);
    if (residual < tol) return pi;
  }
  throw nonconvergence_error("markov: power iteration did not converge");
}

/// Entropy rate -sum_ij pi_i P_ij log2 P_ij of a stationary chain, in bits.
inline double dtmc_entropy_rate(const Mat& P, std::span<const double> pi) {
  check_stochastic(P);
  if (pi.size() != P.rows) throw validation_error("markov: pi dimension mismatch");
  for (std::size_t j = 0; j < P.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < P.rows; ++i) s += pi[i] * P(i, j);
    if (std::abs(s - pi[j]) > 1e-6)
      throw validation_error("markov: supplied distribution is not stationary");
  }
  double h = 0.0;
  for (std::size_t i = 0; i < P.rows; ++i) {
    if (pi[i] <= 0.0) continue;
    for (std::size_t j = 0; j < P.cols; ++j)
      if (P(i, j) > 0.0) h -= pi[i] * P(i, j) * std::log2(P(i, j));
  }
  return h < 0.0 ? 0.0 : h;
}

}  // namespace fcnet
