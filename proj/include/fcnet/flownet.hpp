#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fcnet/errors.hpp"
#include "fcnet/linalg.hpp"
#include "fcnet/network.hpp"

namespace fcnet {

struct FlowSolution {
  std::vector<double> lambda;  // per (node, class), node-major
  std::vector<double> gamma;   // per (node, class)
  double residual = 0.0;       // max traffic-equation violation
  bool feasible = false;       // lambda < mu elementwise and gamma within [0, lambda]
};

enum class TrafficMode { Equality, GivenGamma };

namespace detail {

/// Linear map of the traffic equations: out(v,c) = sum_{w,c'} in(w,c') *
/// weight(c') * move(c', w, v, c). With weight = surjectivity this is the
/// equality-mode recursion matrix; with weight = 1 it propagates a given
/// generated flow.
inline Mat traffic_matrix(const NetworkSpec& net, bool apply_surjectivity) {
  const std::size_t dim = net.pairs();
  Mat A(dim, dim);
  for (std::size_t w = 0; w < net.nodes; ++w)
    for (std::size_t cp = 0; cp < net.classes; ++cp) {
      const double weight = apply_surjectivity ? net.gamma_surj[cp] : 1.0;
      if (weight == 0.0) continue;
      for (std::size_t v = 0; v < net.nodes; ++v)
        for (std::size_t c = 0; c < net.classes; ++c)
          A(net.idx(v, c), net.idx(w, cp)) = weight * net.routing.move(cp, w, v, c);
    }
  return A;
}

inline std::vector<double> mat_apply(const Mat& A, std::span<const double> x) {
  std::vector<double> y(A.rows, 0.0);
  for (std::size_t i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols; ++j) s += A(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace detail

inline constexpr std::size_t kDirectSolveDim = 64;
inline constexpr double kTrafficTol = 1e-12;

/// Solves the per-class traffic equations
///   lambda(v,c) = beta(v,c) + sum_{w,c'} gamma(w,c') * move(c',w,v,c).
/// Equality mode closes the system with gamma = surjectivity * lambda and
/// solves the resulting linear fixed point (directly up to 64 unknowns,
/// iteratively beyond). GivenGamma mode propagates a supplied generated flow
/// through the routing once.
inline FlowSolution solve_traffic(const NetworkSpec& net,
                                  TrafficMode mode = TrafficMode::Equality,
                                  std::span<const double> gamma_given = {}) {
  const std::size_t dim = net.pairs();
  FlowSolution sol;
  sol.lambda.assign(dim, 0.0);
  sol.gamma.assign(dim, 0.0);

  if (mode == TrafficMode::GivenGamma) {
    if (gamma_given.size() != dim)
      throw validation_error("traffic: supplied gamma has the wrong shape");
    const Mat R = detail::traffic_matrix(net, /*apply_surjectivity=*/false);
    const auto routed = detail::mat_apply(R, gamma_given);
    for (std::size_t i = 0; i < dim; ++i) sol.lambda[i] = net.beta[i] + routed[i];
    sol.gamma.assign(gamma_given.begin(), gamma_given.end());
    sol.residual = 0.0;
  } else {
    const Mat A = detail::traffic_matrix(net, /*apply_surjectivity=*/true);
    if (spectral_radius_estimate(A) >= 1.0 - 1e-9)
      throw infeasible_error("traffic: routing feedback is not substochastic, flows diverge");

    std::vector<double> x;
    if (dim <= kDirectSolveDim) {
      Mat M = Mat::identity(dim);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) M(i, j) -= A(i, j);
      x = lu_solve(std::move(M), net.beta);
    } else {
      x = net.beta;
      for (int it = 0; it < 100000; ++it) {
        auto fx = detail::mat_apply(A, x);
        double change = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          fx[i] += net.beta[i];
          change = std::max(change, std::abs(fx[i] - x[i]));
        }
        x.swap(fx);
        if (change < kTrafficTol) break;
      }
    }
    const auto ax = detail::mat_apply(A, x);
    double residual = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      residual = std::max(residual, std::abs(x[i] - (net.beta[i] + ax[i])));
    sol.lambda = std::move(x);
    for (std::size_t v = 0; v < net.nodes; ++v)
      for (std::size_t c = 0; c < net.classes; ++c)
        sol.gamma[net.idx(v, c)] = net.gamma_surj[c] * sol.lambda[net.idx(v, c)];
    sol.residual = residual;
  }

  sol.feasible = true;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(sol.lambda[i] < net.mu[i]) || sol.lambda[i] < -1e-12 ||
        sol.gamma[i] < -1e-12 || sol.gamma[i] > sol.lambda[i] + 1e-9)
      sol.feasible = false;
  }
  return sol;
}

/// Discrete chain over (node, class) states induced by the routing policy: a
/// routed packet follows its move probabilities, and a departing packet is
/// recycled as a fresh external arrival in proportion to the arrival rates.
/// This is the chain whose entropy rate summarises how spread out the
/// network's routing decisions are.
inline Mat conversion_chain(const NetworkSpec& net) {
  const std::size_t dim = net.pairs();
  double beta_total = 0.0;
  for (double b : net.beta) beta_total += b;
  if (!(beta_total > 0.0))
    throw validation_error("conversion chain: network has no external arrivals");

  Mat P(dim, dim);
  for (std::size_t v = 0; v < net.nodes; ++v)
    for (std::size_t c = 0; c < net.classes; ++c) {
      const std::size_t from = net.idx(v, c);
      const double dep = net.routing.depart(c, v);
      for (std::size_t w = 0; w < net.nodes; ++w)
        for (std::size_t c2 = 0; c2 < net.classes; ++c2) {
          const std::size_t to = net.idx(w, c2);
          P(from, to) = net.routing.move(c, v, w, c2) + dep * net.beta[to] / beta_total;
        }
    }
  return P;
}

/// Diagonal-contraction flow bounds per class:
///   lower = beta / (1 - mass * surjectivity),  upper = beta / (1 - mass),
/// where mass is the per-destination routed total. Returned flattened
/// (node, class) like FlowSolution. Throws when a diagonal factor vanishes.
inline std::pair<std::vector<double>, std::vector<double>> lambda_bounds(
    const NetworkSpec& net) {
  const std::size_t dim = net.pairs();
  std::vector<double> lower(dim, 0.0), upper(dim, 0.0);
  for (std::size_t c = 0; c < net.classes; ++c) {
    const auto mass = net.routing.destination_mass(c);
    for (std::size_t v = 0; v < net.nodes; ++v) {
      const double dl = 1.0 - mass[v] * net.gamma_surj[c];
      const double du = 1.0 - mass[v];
      if (std::abs(dl) < 1e-12 || std::abs(du) < 1e-12)
        throw infeasible_error("flow bounds: singular diagonal contraction");
      lower[net.idx(v, c)] = net.beta[net.idx(v, c)] / dl;
      upper[net.idx(v, c)] = net.beta[net.idx(v, c)] / du;
    }
  }
  return {std::move(lower), std::move(upper)};
}

}  // namespace fcnet
