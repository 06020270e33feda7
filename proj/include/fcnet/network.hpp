#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fcnet/errors.hpp"
#include "fcnet/queueing.hpp"

namespace fcnet {

/// Markov routing policy over interior nodes with class conversion. Entry
/// move(c, v, w, c2) is the probability that a class-c packet finishing
/// service at node v continues at node w as class c2; depart(c, v) is the
/// probability that it leaves the network instead. Class indices are ordered
/// by decreasing complexity, and conversion can only raise the index.
struct RoutingPolicy {
  std::size_t nodes = 0;
  std::size_t classes = 0;
  std::vector<double> move_p;    // [c][v][w][c2]
  std::vector<double> depart_p;  // [c][v]
  std::vector<double> source_p;  // [c][v], optional (empty when unspecified)

  RoutingPolicy() = default;
  RoutingPolicy(std::size_t n, std::size_t c)
      : nodes(n),
        classes(c),
        move_p(c * n * n * c, 0.0),
        depart_p(c * n, 0.0) {}

  double& move(std::size_t c, std::size_t v, std::size_t w, std::size_t c2) {
    return move_p[((c * nodes + v) * nodes + w) * classes + c2];
  }
  double move(std::size_t c, std::size_t v, std::size_t w, std::size_t c2) const {
    return move_p[((c * nodes + v) * nodes + w) * classes + c2];
  }
  double& depart(std::size_t c, std::size_t v) { return depart_p[c * nodes + v]; }
  double depart(std::size_t c, std::size_t v) const { return depart_p[c * nodes + v]; }

  bool has_source_split() const { return !source_p.empty(); }
  double source(std::size_t c, std::size_t v) const { return source_p[c * nodes + v]; }

  /// Total routed mass into destination w from class-c packets, summed over
  /// origins and outgoing classes. The diagonal flow bounds use this
  /// per-destination contraction.
  std::vector<double> destination_mass(std::size_t c) const {
    std::vector<double> mass(nodes, 0.0);
    for (std::size_t v = 0; v < nodes; ++v)
      for (std::size_t w = 0; w < nodes; ++w)
        for (std::size_t c2 = 0; c2 < classes; ++c2) mass[w] += move(c, v, w, c2);
    return mass;
  }
};

/// Checks every structural routing invariant and reports each breach; an
/// empty result means the policy is usable.
inline std::vector<std::string> validate_routing(const RoutingPolicy& r) {
  std::vector<std::string> out;
  const double tol = 1e-9;
  auto loc = [](std::size_t c, std::size_t v) {
    return "class " + std::to_string(c) + ", node " + std::to_string(v);
  };

  for (std::size_t c = 0; c < r.classes; ++c) {
    for (std::size_t v = 0; v < r.nodes; ++v) {
      double row = r.depart(c, v);
      if (row < -tol || row > 1.0 + tol)
        out.push_back("departure probability outside [0,1] at " + loc(c, v));
      for (std::size_t w = 0; w < r.nodes; ++w) {
        for (std::size_t c2 = 0; c2 < r.classes; ++c2) {
          const double p = r.move(c, v, w, c2);
          if (p < -tol || p > 1.0 + tol)
            out.push_back("routing probability outside [0,1] at " + loc(c, v));
          if (c2 < c && p > tol)
            out.push_back("conversion to a more complex class (" + std::to_string(c) +
                          " -> " + std::to_string(c2) + ") at node " + std::to_string(v));
          row += p;
        }
      }
      if (std::abs(row - 1.0) > tol)
        out.push_back("routing row sums to " + std::to_string(row) + " at " + loc(c, v));
    }
    bool open = false;
    for (std::size_t v = 0; v < r.nodes; ++v)
      if (r.depart(c, v) > tol) open = true;
    if (!open)
      out.push_back("class " + std::to_string(c) + " can never depart (closed flow)");
    if (r.has_source_split()) {
      double s = 0.0;
      for (std::size_t v = 0; v < r.nodes; ++v) {
        const double p = r.source(c, v);
        if (p < -tol || p > 1.0 + tol)
          out.push_back("source split outside [0,1] at " + loc(c, v));
        s += p;
      }
      if (std::abs(s - 1.0) > tol)
        out.push_back("source split sums to " + std::to_string(s) + " for class " +
                      std::to_string(c));
    }
  }
  return out;
}

/// Everything the analytic pipeline needs to know about one network: rates
/// per (node, class), compute models, per-class surjectivity and routing.
/// Arrays are flattened node-major: index(v, c) = v * classes + c.
struct NetworkSpec {
  std::string name;
  std::size_t nodes = 0;
  std::size_t classes = 0;
  std::vector<double> beta;            // external arrival rate per (node, class)
  std::vector<double> mu;              // transmit service rate per (node, class)
  std::vector<double> chi;             // compute rate per (node, class), inf = immediate
  std::vector<double> k;               // cost constant per (node, class)
  std::vector<ComplexityClass> cls;    // complexity model per (node, class)
  std::vector<double> gamma_surj;      // surjectivity per class, in [0, 1]
  std::vector<std::string> class_names;
  std::vector<std::string> node_names;
  RoutingPolicy routing;
  DelayMode delay_mode = DelayMode::Additive;

  std::size_t idx(std::size_t v, std::size_t c) const { return v * classes + c; }
  std::size_t pairs() const { return nodes * classes; }

  NodeClassParams params(std::size_t v, std::size_t c, double lambda_vc,
                         double gamma_vc) const {
    const std::size_t i = idx(v, c);
    return {lambda_vc, mu[i], chi[i], k[i], cls[i], gamma_vc};
  }
};

inline std::vector<std::string> validate_network(const NetworkSpec& net) {
  std::vector<std::string> out;
  const std::size_t p = net.pairs();
  if (net.nodes == 0 || net.classes == 0) out.push_back("network has no nodes or classes");
  if (net.beta.size() != p || net.mu.size() != p || net.chi.size() != p ||
      net.k.size() != p || net.cls.size() != p) {
    out.push_back("per-(node,class) arrays do not match the declared shape");
    return out;
  }
  if (net.gamma_surj.size() != net.classes)
    out.push_back("surjectivity vector does not match the class count");
  for (std::size_t i = 0; i < p; ++i) {
    if (net.beta[i] < 0.0) out.push_back("negative external arrival rate");
    if (!(net.mu[i] > 0.0)) out.push_back("non-positive transmit service rate");
    if (!(net.chi[i] > 0.0)) out.push_back("non-positive compute rate");
    if (net.k[i] < 0.0) out.push_back("negative cost constant");
  }
  for (double gs : net.gamma_surj)
    if (gs < 0.0 || gs > 1.0) out.push_back("surjectivity outside [0, 1]");
  if (net.routing.nodes != net.nodes || net.routing.classes != net.classes)
    out.push_back("routing policy shape does not match the network");
  else
    for (auto& v : validate_routing(net.routing)) out.push_back(v);
  return out;
}

}  // namespace fcnet
