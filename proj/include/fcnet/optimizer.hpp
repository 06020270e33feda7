#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fcnet/errors.hpp"
#include "fcnet/flownet.hpp"
#include "fcnet/network.hpp"
#include "fcnet/queueing.hpp"

namespace fcnet {

/// Pooled-capacity communication baseline: per class, one over the total
/// slack left when the full (uncompressed) flow is pushed through, using the
/// diagonal routing contraction. This is the no-computation reference cost.
inline double comms_cost(const NetworkSpec& net) {
  const auto [lower, upper] = lambda_bounds(net);
  (void)lower;
  double cost = 0.0;
  for (std::size_t c = 0; c < net.classes; ++c) {
    double slack = 0.0;
    for (std::size_t v = 0; v < net.nodes; ++v) {
      const std::size_t i = net.idx(v, c);
      if (!(upper[i] < net.mu[i]))
        throw infeasible_error("comms cost: uncompressed flow saturates node " +
                               std::to_string(v));
      if (upper[i] < 0.0)
        throw infeasible_error("comms cost: diagonal contraction yields negative flow");
      slack += net.mu[i] - upper[i];
    }
    cost += 1.0 / slack;
  }
  return cost;
}

struct Objective {
  double total = std::numeric_limits<double>::infinity();
  std::vector<CostBreakdown> per_node_class;  // node-major, like FlowSolution
  bool feasible = false;
  bool converged = false;
  std::vector<std::string> active_constraints;
};

struct SolverOptions {
  enum class Mode { ProjectedDescent, ClosedForm, Grid };
  Mode mode = Mode::ProjectedDescent;
  int max_iters = 600;
  double step = 0.25;   // initial step, as a fraction of the decision box
  double tol = 1e-13;   // objective improvement cutoff
  int restarts = 8;
  std::uint64_t seed = 0x51a7ab1eULL;
  int grid_points = 2001;  // per coordinate, Mode::Grid (small problems only)
};

namespace detail {

/// Cost of a candidate generated-flow vector. Infinite when any pair is
/// pushed past a stability or box limit.
inline Objective evaluate_objective(const NetworkSpec& net, const FlowSolution& flow) {
  Objective obj;
  obj.per_node_class.assign(net.pairs(), {});
  double total = 0.0;
  for (std::size_t v = 0; v < net.nodes; ++v) {
    for (std::size_t c = 0; c < net.classes; ++c) {
      const std::size_t i = net.idx(v, c);
      const double lam = flow.lambda[i], gam = flow.gamma[i];
      const double slack = 1e-9 * std::max(1e-30, lam);
      if (!(lam < net.mu[i]) || gam > lam + slack ||
          gam < net.gamma_surj[c] * lam - slack)
        return obj;  // infeasible: infinite total
      try {
        obj.per_node_class[i] = node_class_cost(net.params(v, c, lam, gam), net.delay_mode);
      } catch (const infeasible_error&) {
        return obj;
      }
      total += obj.per_node_class[i].total;
    }
  }
  obj.total = total;
  obj.feasible = true;
  return obj;
}

/// Clamps gamma into [surjectivity * lambda, lambda] where lambda is the
/// traffic response to gamma itself; iterated until the pair is consistent.
inline std::vector<double> project_box(const NetworkSpec& net, std::vector<double> gamma) {
  const Mat R = traffic_matrix(net, /*apply_surjectivity=*/false);
  for (int round = 0; round < 500; ++round) {
    const auto routed = mat_apply(R, gamma);
    double change = 0.0;
    for (std::size_t v = 0; v < net.nodes; ++v)
      for (std::size_t c = 0; c < net.classes; ++c) {
        const std::size_t i = net.idx(v, c);
        const double lam = net.beta[i] + routed[i];
        const double lo = net.gamma_surj[c] * lam;
        const double next = std::clamp(gamma[i], lo, lam);
        change = std::max(change, std::abs(next - gamma[i]));
        gamma[i] = next;
      }
    if (change < 1e-14) break;
  }
  return gamma;
}

/// Feasible start with gamma = mix * lambda + (1 - mix) * floor per pair,
/// solved as a linear fixed point so the traffic equations hold exactly.
inline std::vector<double> blended_start(const NetworkSpec& net,
                                         std::span<const double> mix) {
  const std::size_t dim = net.pairs();
  const Mat R = traffic_matrix(net, /*apply_surjectivity=*/false);
  std::vector<double> d(dim, 0.0), rhs(dim, 0.0);
  for (std::size_t v = 0; v < net.nodes; ++v)
    for (std::size_t c = 0; c < net.classes; ++c) {
      const std::size_t i = net.idx(v, c);
      d[i] = net.gamma_surj[c] + mix[i] * (1.0 - net.gamma_surj[c]);
      rhs[i] = d[i] * net.beta[i];
    }
  Mat M = Mat::identity(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) M(i, j) -= d[i] * R(i, j);
  return lu_solve(std::move(M), std::move(rhs));
}

inline double objective_at(const NetworkSpec& net, std::span<const double> gamma,
                           FlowSolution* flow_out = nullptr) {
  FlowSolution flow = solve_traffic(net, TrafficMode::GivenGamma, gamma);
  const Objective obj = evaluate_objective(net, flow);
  if (flow_out) *flow_out = std::move(flow);
  return obj.total;
}

}  // namespace detail

/// Closed-form generated flow when transmit cost dominates: the compression
/// floor held with equality through the full routing feedback,
/// gamma = surjectivity * (beta + routed gamma). Identical to the
/// equality-mode traffic solution.
inline FlowSolution convex_special_case(const NetworkSpec& net) {
  return solve_traffic(net, TrafficMode::Equality);
}

/// Minimises the summed per-pair delay over generated flows gamma, subject to
/// floor <= gamma <= lambda(gamma) < mu. Arrival rates are always recovered
/// through the traffic equations, so conservation holds at every iterate.
/// Projected descent with numerical gradients, multistart, and a coordinate
/// line-search polish; possibly non-convex cost surfaces are handled by the
/// restarts, not by any global guarantee.
inline std::pair<Objective, FlowSolution> min_cost(const NetworkSpec& net,
                                                   const SolverOptions& opts = {}) {
  const std::size_t dim = net.pairs();
  const FlowSolution floor_sol = solve_traffic(net, TrafficMode::Equality);
  if (!floor_sol.feasible)
    throw infeasible_error("min cost: even the fully compressed flow is unstable");

  std::mt19937_64 rng(opts.seed);
  auto F = [&](std::span<const double> g) { return detail::objective_at(net, g); };

  if (opts.mode == SolverOptions::Mode::ClosedForm) {
    FlowSolution flow = solve_traffic(net, TrafficMode::GivenGamma, floor_sol.gamma);
    Objective obj = detail::evaluate_objective(net, flow);
    obj.converged = true;
    obj.feasible = flow.feasible;
    return {std::move(obj), std::move(flow)};
  }
  if (opts.mode == SolverOptions::Mode::Grid) {
    if (dim != 1)
      throw validation_error("min cost: grid mode handles single-pair networks only");
    double best_g = floor_sol.gamma[0];
    double best_v = F(std::vector<double>{best_g});
    // bracket: [floor flow, identity flow]
    std::vector<double> one(1, 1.0);
    const double lo = floor_sol.gamma[0];
    const double hi = detail::project_box(net, detail::blended_start(net, one))[0];
    const int points = std::max(2, opts.grid_points);
    for (int i = 0; i < points; ++i) {
      const double g = lo + (hi - lo) * static_cast<double>(i) /
                                static_cast<double>(points - 1);
      const double v = F(std::vector<double>{g});
      if (v < best_v) {
        best_v = v;
        best_g = g;
      }
    }
    FlowSolution flow =
        solve_traffic(net, TrafficMode::GivenGamma, std::vector<double>{best_g});
    Objective obj = detail::evaluate_objective(net, flow);
    obj.converged = true;
    obj.feasible = flow.feasible;
    return {std::move(obj), std::move(flow)};
  }

  std::vector<double> best_gamma = floor_sol.gamma;
  double best_val = F(best_gamma);
  bool converged = true;

  const int starts = std::max(1, opts.restarts);
  for (int s = 0; s < starts + 2; ++s) {
    std::vector<double> mix(dim, 0.0);
    if (s == 1)
      std::fill(mix.begin(), mix.end(), 1.0);  // identity corner
    else if (s >= 2)
      for (double& m : mix) m = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::vector<double> gamma;
    try {
      gamma = detail::project_box(net, detail::blended_start(net, mix));
    } catch (const infeasible_error&) {
      continue;
    }
    double val = F(gamma);
    if (!std::isfinite(val)) continue;

    // scale steps to the decision box at the start point
    FlowSolution flow = solve_traffic(net, TrafficMode::GivenGamma, gamma);
    double box = 0.0;
    for (std::size_t v = 0; v < net.nodes; ++v)
      for (std::size_t c = 0; c < net.classes; ++c) {
        const std::size_t i = net.idx(v, c);
        box = std::max(box, flow.lambda[i] * (1.0 - net.gamma_surj[c]));
      }
    if (box <= 0.0) box = 1.0;

    double step = opts.step * box;
    bool this_converged = false;
    std::vector<double> grad(dim, 0.0), cand(dim, 0.0);
    for (int it = 0; it < opts.max_iters; ++it) {
      // central-difference gradient
      const double h = std::max(1e-8 * box, 1e-12);
      double gnorm = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        cand = gamma;
        cand[i] = gamma[i] + h;
        const double fp = F(detail::project_box(net, cand));
        cand[i] = gamma[i] - h;
        const double fm = F(detail::project_box(net, cand));
        grad[i] = (std::isfinite(fp) && std::isfinite(fm)) ? (fp - fm) / (2.0 * h) : 0.0;
        gnorm += grad[i] * grad[i];
      }
      gnorm = std::sqrt(gnorm);
      if (gnorm == 0.0) {
        this_converged = true;
        break;
      }
      bool improved = false;
      while (step > 1e-13 * box) {
        for (std::size_t i = 0; i < dim; ++i)
          cand[i] = gamma[i] - step * grad[i] / gnorm;
        cand = detail::project_box(net, cand);
        const double fv = F(cand);
        if (fv < val - 1e-16) {
          gamma.swap(cand);
          improved = true;
          if (std::abs(val - fv) < opts.tol * std::max(1.0, std::abs(val)))
            this_converged = true;
          val = fv;
          step *= 1.5;
          break;
        }
        step *= 0.5;
      }
      if (!improved) {
        this_converged = true;
        break;
      }
      if (this_converged) break;
    }

    // coordinate polish: golden-section along each coordinate of the box
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int sweep = 0; sweep < 3; ++sweep) {
      FlowSolution cur = solve_traffic(net, TrafficMode::GivenGamma, gamma);
      for (std::size_t i = 0; i < dim; ++i) {
        const std::size_t c = i % net.classes;
        double lo = net.gamma_surj[c] * cur.lambda[i];
        double hi = cur.lambda[i];
        if (!(hi > lo)) continue;
        auto at = [&](double t) {
          cand = gamma;
          cand[i] = lo + t * (hi - lo);
          return F(detail::project_box(net, cand));
        };
        double a = 0.0, b = 1.0;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = at(x1), f2 = at(x2);
        for (int g = 0; g < 40; ++g) {
          if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = at(x1);
          } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = at(x2);
          }
        }
        const double t = f1 < f2 ? x1 : x2;
        cand = gamma;
        cand[i] = lo + t * (hi - lo);
        cand = detail::project_box(net, cand);
        const double fv = F(cand);
        if (fv < val) {
          val = fv;
          gamma.swap(cand);
          cur = solve_traffic(net, TrafficMode::GivenGamma, gamma);
        }
      }
    }

    if (val < best_val) {
      best_val = val;
      best_gamma = gamma;
      converged = this_converged;
    }
  }

  FlowSolution flow = solve_traffic(net, TrafficMode::GivenGamma, best_gamma);
  Objective obj = detail::evaluate_objective(net, flow);
  if (!std::isfinite(obj.total))
    throw infeasible_error("min cost: no feasible operating point found");
  obj.converged = converged;
  obj.feasible = flow.feasible;

  const double tag_tol = 1e-7;
  for (std::size_t v = 0; v < net.nodes; ++v)
    for (std::size_t c = 0; c < net.classes; ++c) {
      const std::size_t i = net.idx(v, c);
      const double lam = flow.lambda[i], gam = flow.gamma[i];
      const double width = std::max(1e-30, lam);
      const std::string at = "(" + std::to_string(v) + "," + std::to_string(c) + ")";
      if (std::abs(gam - net.gamma_surj[c] * lam) <= tag_tol * width)
        obj.active_constraints.push_back("compression floor active at " + at);
      if (std::abs(gam - lam) <= tag_tol * width)
        obj.active_constraints.push_back("identity ceiling active at " + at);
    }
  return {std::move(obj), std::move(flow)};
}

/// Outcome of running the optimiser on the two canonical placements of n
/// classes over n nodes: each class pinned to its own node versus all classes
/// spread uniformly with surjectivity-weighted departure.
struct MixComparison {
  Objective separate, mixed;
  FlowSolution separate_flow, mixed_flow;
  bool separate_feasible = false, mixed_feasible = false;
  std::vector<double> separate_node_L, mixed_node_L;  // per node, summed over classes
};

namespace detail {

inline std::vector<double> node_occupancy(const NetworkSpec& net, const FlowSolution& f) {
  std::vector<double> L(net.nodes, 0.0);
  for (std::size_t v = 0; v < net.nodes; ++v)
    for (std::size_t c = 0; c < net.classes; ++c) {
      const std::size_t i = net.idx(v, c);
      if (f.lambda[i] <= 0.0) continue;
      if (f.gamma[i] < net.mu[i])
        L[v] += analytic_decomposition(f.lambda[i], f.gamma[i], net.mu[i]).total;
    }
  return L;
}

}  // namespace detail

/// Builds and optimises the separated and mixed placements for a network with
/// as many classes as nodes. Class c receives the class-total external rate;
/// mixing splits it uniformly and departs with probability equal to the class
/// surjectivity, spreading the remainder evenly (self-loop included).
inline MixComparison compare_separate_vs_mixed(const NetworkSpec& net,
                                               const SolverOptions& opts = {}) {
  if (net.nodes != net.classes)
    throw validation_error("separate-vs-mixed: needs one class per node");
  const std::size_t n = net.nodes;
  std::vector<double> class_total(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t c = 0; c < n; ++c) class_total[c] += net.beta[net.idx(v, c)];

  NetworkSpec sep = net;
  sep.routing = RoutingPolicy(n, n);
  std::fill(sep.beta.begin(), sep.beta.end(), 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    sep.beta[sep.idx(c, c)] = class_total[c];
    for (std::size_t v = 0; v < n; ++v) sep.routing.depart(c, v) = 1.0;
  }

  NetworkSpec mix = net;
  mix.routing = RoutingPolicy(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const double stay = (1.0 - net.gamma_surj[c]) / static_cast<double>(n);
    for (std::size_t v = 0; v < n; ++v) {
      mix.beta[mix.idx(v, c)] = class_total[c] / static_cast<double>(n);
      mix.routing.depart(c, v) = net.gamma_surj[c];
      for (std::size_t w = 0; w < n; ++w) mix.routing.move(c, v, w, c) = stay;
    }
  }

  MixComparison out;
  try {
    auto [obj, flow] = min_cost(sep, opts);
    out.separate = std::move(obj);
    out.separate_flow = std::move(flow);
    out.separate_feasible = true;
    out.separate_node_L = detail::node_occupancy(sep, out.separate_flow);
  } catch (const infeasible_error&) {
    out.separate_feasible = false;
    out.separate_node_L.assign(n, std::numeric_limits<double>::quiet_NaN());
  }
  try {
    auto [obj, flow] = min_cost(mix, opts);
    out.mixed = std::move(obj);
    out.mixed_flow = std::move(flow);
    out.mixed_feasible = true;
    out.mixed_node_L = detail::node_occupancy(mix, out.mixed_flow);
  } catch (const infeasible_error&) {
    out.mixed_feasible = false;
    out.mixed_node_L.assign(n, std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace fcnet
