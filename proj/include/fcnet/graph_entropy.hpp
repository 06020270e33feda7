#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fcnet/errors.hpp"
#include "fcnet/graph.hpp"
#include "fcnet/pmf.hpp"

namespace fcnet {

struct GraphEntropyOptions {
  double tol = 1e-12;       // stop when the objective improves by less than this
  int max_iters = 50000;    // per start
  int restarts = 8;         // random restarts beyond the uniform initialisation
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  std::size_t vertex_cap = 20;
};

struct GraphEntropyResult {
  double value_bits = 0.0;
  /// conditional[x][w]: probability of covering set w given symbol x.
  /// Nonzero only when x is a member of w.
  std::vector<std::vector<double>> conditional;
  /// The covering sets (maximal independent sets), index-aligned with the
  /// columns of `conditional`.
  std::vector<std::vector<std::size_t>> sets;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

/// Mutual information I(X;W) in bits for a conditional supported on the sets.
inline double mutual_information_bits(const std::vector<double>& px,
                                      const std::vector<std::vector<double>>& cond) {
  const std::size_t n = px.size();
  const std::size_t s = cond.empty() ? 0 : cond[0].size();
  std::vector<double> q(s, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t w = 0; w < s; ++w) q[w] += px[x] * cond[x][w];
  double info = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t w = 0; w < s; ++w) {
      const double pw = cond[x][w];
      if (pw > 0.0 && q[w] > 0.0) info += px[x] * pw * std::log2(pw / q[w]);
    }
  }
  return info > 0.0 ? info : 0.0;
}

}  // namespace detail

/// Minimises I(X;W) over conditionals p(w|x) in which W ranges over the
/// maximal independent sets of `g` and is constrained to contain x. Uses
/// alternating minimisation: the marginal step and the conditional step each
/// solve their subproblem exactly, so the objective is non-increasing, and
/// the problem is convex in the conditional. Random restarts guard the
/// degenerate corners.
inline GraphEntropyResult graph_entropy(const CharacteristicGraph& g, const Pmf& pmf,
                                        const GraphEntropyOptions& opts = {}) {
  if (pmf.size() != g.order())
    throw validation_error("graph entropy: pmf does not match vertex set");
  if (!(opts.tol > 0.0)) throw validation_error("graph entropy: tolerance must be positive");

  const std::size_t n = g.order();
  const auto sets = maximal_independent_sets(g, opts.vertex_cap);
  const std::size_t s = sets.size();
  std::vector<std::vector<std::size_t>> containing(n);
  for (std::size_t w = 0; w < s; ++w)
    for (std::size_t x : sets[w]) containing[x].push_back(w);

  const std::vector<double>& px = pmf.probs();
  std::mt19937_64 rng(opts.seed);

  GraphEntropyResult best;
  best.sets = sets;
  best.value_bits = std::numeric_limits<double>::infinity();

  for (int start = 0; start <= opts.restarts; ++start) {
    std::vector<std::vector<double>> cond(n, std::vector<double>(s, 0.0));
    for (std::size_t x = 0; x < n; ++x) {
      double total = 0.0;
      for (std::size_t w : containing[x]) {
        const double weight =
            start == 0 ? 1.0 : std::uniform_real_distribution<double>(0.05, 1.0)(rng);
        cond[x][w] = weight;
        total += weight;
      }
      for (std::size_t w : containing[x]) cond[x][w] /= total;
    }

    double prev = std::numeric_limits<double>::infinity();
    int it = 0;
    bool converged = false;
    std::vector<double> q(s, 0.0);
    for (; it < opts.max_iters; ++it) {
      std::fill(q.begin(), q.end(), 0.0);
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t w : containing[x]) q[w] += px[x] * cond[x][w];

      double obj = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        double reach = 0.0;
        for (std::size_t w : containing[x]) reach += q[w];
        if (reach > 0.0) {
          for (std::size_t w : containing[x]) cond[x][w] = q[w] / reach;
          if (px[x] > 0.0) obj -= px[x] * std::log2(reach);
        }
      }
      if (std::abs(prev - obj) < opts.tol) {
        converged = true;
        ++it;
        break;
      }
      prev = obj;
    }

    const double value = detail::mutual_information_bits(px, cond);
    if (value < best.value_bits) {
      best.value_bits = value;
      best.conditional = std::move(cond);
      best.iterations = it;
      best.converged = converged;
    }
  }
  return best;
}

/// Ratio of a function's covering entropy to the raw source entropy. 1 when
/// nothing can be compressed away (identity), 0 for constant functions.
inline double entropic_surjectivity(double hg_bits, double hx_bits) {
  if (!(hx_bits > 0.0))
    throw validation_error("surjectivity: degenerate source with zero entropy");
  if (hg_bits < -1e-12 || hg_bits > hx_bits + 1e-9)
    throw validation_error("surjectivity: covering entropy outside [0, H(X)]");
  const double ratio = hg_bits / hx_bits;
  return std::clamp(ratio, 0.0, 1.0);
}

}  // namespace fcnet
