#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "fcnet/errors.hpp"

namespace fcnet {

struct ThresholdResult {
  double rho_th = 0.0;
  bool feasible = false;
  int iterations = 0;
};

/// Smallest traffic intensity at which computing at a node beats pure
/// relaying: the unique root of
///   rho^2 / (1 - rho) = d * (1 - rho * gs) / (1 - gs)
/// on [0, 1). The left side grows from 0 to infinity and the right side is
/// non-increasing, so bisection on their difference is exact. Above the
/// returned intensity the computing condition holds strictly.
inline ThresholdResult load_threshold(double d, double gamma_surj, double tol = 1e-10) {
  if (d < 0.0) throw validation_error("load threshold: negative operation count");
  if (gamma_surj < 0.0 || gamma_surj >= 1.0)
    throw infeasible_error("load threshold: surjectivity must lie in [0, 1)");
  if (d == 0.0) return {0.0, true, 0};

  auto gap = [&](double rho) {
    return rho * rho / (1.0 - rho) - d * (1.0 - rho * gamma_surj) / (1.0 - gamma_surj);
  };
  double lo = 0.0, hi = 1.0 - 1e-12;
  if (gap(hi) <= 0.0) return {hi, false, 0};  // crossing pushed beyond the grid
  int it = 0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0.0 ? hi : lo) = mid;
    ++it;
  }
  return {0.5 * (lo + hi), true, it};
}

/// Variant of the threshold with the backlog coupled back to the intensity:
/// the operation count is evaluated at m(rho) = rho (1 - gs) / (1 - rho gs),
/// the fully compressed queue split, instead of being supplied. The crossing
/// is located by a scan for the first sign change plus bisection. Off by
/// default in every pipeline; load_threshold with an explicit backlog is the
/// primary definition.
template <typename OpCount>
inline ThresholdResult load_threshold_self_consistent(OpCount op_count,
                                                      double gamma_surj,
                                                      double tol = 1e-10) {
  if (gamma_surj < 0.0 || gamma_surj >= 1.0)
    throw infeasible_error("load threshold: surjectivity must lie in [0, 1)");
  auto gap = [&](double rho) {
    const double m = rho * (1.0 - gamma_surj) / (1.0 - rho * gamma_surj);
    return rho * rho / (1.0 - rho) -
           op_count(m) * (1.0 - rho * gamma_surj) / (1.0 - gamma_surj);
  };
  const double hi_edge = 1.0 - 1e-12;
  double lo = 0.0, hi = hi_edge;
  bool bracketed = false;
  const int scan = 20000;
  for (int i = 1; i <= scan; ++i) {
    const double rho = hi_edge * static_cast<double>(i) / static_cast<double>(scan);
    if (gap(rho) > 0.0) {
      hi = rho;
      lo = hi_edge * static_cast<double>(i - 1) / static_cast<double>(scan);
      bracketed = true;
      break;
    }
  }
  if (!bracketed) return {hi_edge, false, scan};
  int it = 0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0.0 ? hi : lo) = mid;
    ++it;
  }
  return {0.5 * (lo + hi), true, it};
}

/// Necessary stability condition: the compute backlog must dominate the
/// transmit backlog, d >= n.
inline bool stability_check(double d, double n) {
  if (d < 0.0 || n < 0.0) throw validation_error("stability: negative argument");
  return d >= n;
}

enum class SurjectionRegime { Sublinear, Linear };

inline const char* to_string(SurjectionRegime r) {
  return r == SurjectionRegime::Linear ? "linear" : "sublinear";
}

struct LBounds {
  double lower = 0.0;   // occupancy at the smallest admissible generated flow
  double upper = 0.0;   // occupancy at the largest admissible generated flow
  double b_minus = 0.0; // smallest admissible generated flow
  double b_plus = 0.0;  // largest admissible generated flow (capped at lambda)
  SurjectionRegime regime = SurjectionRegime::Sublinear;
};

/// Occupancy bounds from requiring L = gamma * (d/lambda + 1/(mu-gamma)) to
/// cover at least d operations. Admissible generated flows are the roots of
///   gamma^2 - 2 a gamma + lambda mu = 0,  2a = lambda (1 + 1/d) + mu.
/// The raw upper root always exceeds mu, so the admissible interval is capped
/// by the physical ceiling gamma <= lambda. The regime is linear when a^2 is
/// within `linear_factor` of lambda*mu (the roots pinch together).
inline LBounds little_L_bounds(double lambda, double mu, double d,
                               double linear_factor = 1.01) {
  if (!(lambda > 0.0) || !(mu > 0.0)) throw validation_error("L bounds: rates must be positive");
  if (!(lambda < mu)) throw infeasible_error("L bounds: arrival rate >= service rate");
  if (!(d > 0.0)) throw validation_error("L bounds: operation count must be positive");

  const double a = 0.5 * (lambda * (1.0 + 1.0 / d) + mu);
  const double disc = a * a - lambda * mu;
  if (disc < 0.0) throw infeasible_error("L bounds: no admissible generated flow");
  const double root = std::sqrt(disc);

  LBounds out;
  out.b_minus = a - root;
  out.b_plus = std::min(a + root, lambda);
  out.regime = a * a <= linear_factor * lambda * mu ? SurjectionRegime::Linear
                                                    : SurjectionRegime::Sublinear;
  auto occupancy = [&](double g) { return g * (d / lambda + 1.0 / (mu - g)); };
  out.lower = occupancy(out.b_minus);
  out.upper = occupancy(out.b_plus);
  return out;
}

struct FlowLBounds {
  double lower = 0.0;      // minimum occupancy forced by the compression floor
  double upper = 0.0;      // no-computation occupancy lambda / (mu - lambda)
  double gamma_min = 0.0;  // smallest generated flow able to carry the function
  double upper_surj = 0.0; // surjectivity approximation 1 / (1 - hg/hx)
};

/// Occupancy window pinned by the functional-compression floor hg (bits) and
/// the raw-source ceiling.
inline FlowLBounds flow_L_bounds(double hg, double h_x, double mu, double lambda) {
  if (hg < 0.0) throw validation_error("flow bounds: negative compression floor");
  if (!(h_x > 0.0)) throw validation_error("flow bounds: source entropy must be positive");
  if (!(hg < mu)) throw infeasible_error("flow bounds: compression floor >= service rate");
  if (!(lambda < mu)) throw infeasible_error("flow bounds: arrival rate >= service rate");

  FlowLBounds out;
  out.lower = hg / (mu - hg);
  out.upper = lambda / (mu - lambda);
  out.gamma_min = mu * hg / (2.0 * mu - hg);
  const double ratio = hg / h_x;
  out.upper_surj = ratio < 1.0 ? 1.0 / (1.0 - ratio)
                               : std::numeric_limits<double>::infinity();
  return out;
}

struct AllocationCost {
  double compute = 0.0;
  double comm = 0.0;
};

/// Cost of computing a running minimum over n_bits of input spread across
/// v_count nodes by halving, optionally funnelled through w_count
/// intermediate combiners. Each node transmits once, at unit-exponential
/// cost.
inline AllocationCost bisection_allocation_cost(double n_bits, std::size_t v_count,
                                                std::size_t w_count) {
  if (v_count < 1 || n_bits < static_cast<double>(v_count))
    throw validation_error("allocation: need n_bits >= nodes >= 1");
  if (w_count >= v_count)
    throw validation_error("allocation: intermediate set must be a strict subset");
  const double v = static_cast<double>(v_count);
  const double per_node = std::log2(n_bits / v);
  AllocationCost out;
  out.comm = v * std::exp(1.0);
  if (w_count == 0) {
    out.compute = v * per_node + std::log2(v);
  } else {
    const double w = static_cast<double>(w_count);
    out.compute = (v - w) * per_node + w * std::log2((v - w) / w) + std::log2(w);
  }
  return out;
}

struct SplitCost {
  double split = 0.0;    // cost with the dot product sharded over workers
  double central = 0.0;  // cost of scoring in one place
  double min_workers = 0.0;  // sharding starts to pay off at about this size
};

/// Linear-scoring cost comparison: central evaluation costs n log2 n; sharding
/// over w workers costs (n/w) log2(n) * log2((n/w) log2 n) per shard batch
/// plus w combination steps, and needs at least ~log2 n workers to win.
inline SplitCost classification_split_cost(double n_bits, std::size_t workers) {
  if (!(n_bits >= 1.0) || workers < 1)
    throw validation_error("split cost: need n_bits >= 1 and workers >= 1");
  const double w = static_cast<double>(workers);
  const double logn = std::log2(n_bits);
  SplitCost out;
  out.central = n_bits * logn;
  const double shard = n_bits / w * logn;
  out.split = shard * std::log2(shard) + w;
  out.min_workers = logn;
  return out;
}

}  // namespace fcnet
