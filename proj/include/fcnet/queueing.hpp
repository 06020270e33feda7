#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fcnet/errors.hpp"

namespace fcnet {

enum class NodeKind { Interior, Source, Sink };

enum class ComplexityClass { Search, MapReduce, Classification, ExpService };

inline const char* to_string(ComplexityClass c) {
  switch (c) {
    case ComplexityClass::Search: return "search";
    case ComplexityClass::MapReduce: return "mapreduce";
    case ComplexityClass::Classification: return "classification";
    case ComplexityClass::ExpService: return "exp_service";
  }
  return "?";
}

enum class DelayMode { Additive, Pipelined };

/// Mean waiting-plus-service time of the transmit queue. Interior nodes are
/// loaded by the generated flow, the source by the raw external rate, and the
/// sink costs nothing.
inline double comm_delay(double mu, double gamma, NodeKind kind = NodeKind::Interior,
                         double beta = 0.0) {
  switch (kind) {
    case NodeKind::Sink:
      return 0.0;
    case NodeKind::Source:
      if (!(beta < mu)) throw infeasible_error("comm delay: source rate >= service rate");
      return 1.0 / (mu - beta);
    case NodeKind::Interior:
      if (!(gamma < mu)) throw infeasible_error("comm delay: generated flow >= service rate");
      if (gamma < 0.0) throw validation_error("comm delay: negative flow");
      return 1.0 / (mu - gamma);
  }
  return 0.0;
}

/// Operation count for working off a backlog of m units. All three forms
/// vanish at m = 0, so an identity (no-op) computation costs nothing.
inline double complexity(ComplexityClass cls, double m, double k) {
  if (m < 0.0) throw validation_error("complexity: negative input size");
  if (k < 0.0) throw validation_error("complexity: negative cost constant");
  switch (cls) {
    case ComplexityClass::Search: return k * std::log2(1.0 + m);
    case ComplexityClass::MapReduce: return k * m;
    case ComplexityClass::Classification: return k * std::expm1(m);
    case ComplexityClass::ExpService:
      throw validation_error("complexity: exp-service cost is rate-based, not size-based");
  }
  return 0.0;
}

/// Mean compute time for an operation count d arriving at rate lambda.
inline double comp_delay(double lambda, double d, NodeKind kind = NodeKind::Interior) {
  if (kind != NodeKind::Interior) return 0.0;
  if (d < 0.0) throw validation_error("comp delay: negative operation count");
  if (!(lambda > 0.0)) throw validation_error("comp delay: arrival rate must be positive");
  return d / lambda;
}

/// Mean compute time when service is exponential with rate chi.
inline double comp_delay_exp_service(double lambda, double chi, double k) {
  if (!(chi > 0.0)) throw validation_error("comp delay: compute rate must be positive");
  if (lambda < 0.0) throw validation_error("comp delay: negative arrival rate");
  const double sigma = lambda / chi;
  if (!(sigma < 1.0)) throw infeasible_error("comp delay: compute queue unstable");
  return k / (chi * (1.0 - sigma));
}

struct RoutedCompDelay {
  double departing;  // share chargeable to packets that leave the network
  double routed;     // share chargeable to packets forwarded onwards
  double total() const { return departing + routed; }
};

/// Compute cost split by what happens to the output stream. The two shares
/// always total m / (lambda - gamma) because departure and routing
/// probabilities partition the stream.
inline RoutedCompDelay comp_delay_routed(double lambda, double gamma, double m,
                                         double p_depart, double p_route_total) {
  if (m < 0.0) throw validation_error("routed comp delay: negative backlog");
  if (p_depart < 0.0 || p_route_total < 0.0 ||
      std::abs(p_depart + p_route_total - 1.0) > 1e-9)
    throw validation_error("routed comp delay: probabilities must partition the stream");
  if (!(gamma < lambda))
    throw infeasible_error("routed comp delay: undefined when the full flow bypasses computation");
  const double base = m / (lambda - gamma);
  return {p_depart * base, p_route_total * base};
}

/// Split of the average occupancy L between the compute and transmit queues.
struct QueueDecomposition {
  double total;    // L
  double compute;  // m
  double comm;     // n
};

inline QueueDecomposition little_decompose(double L, double lambda, double gamma) {
  if (L < 0.0) throw validation_error("decompose: negative occupancy");
  if (!(lambda > 0.0)) throw validation_error("decompose: arrival rate must be positive");
  if (gamma < 0.0 || gamma > lambda)
    throw validation_error("decompose: generated flow outside [0, lambda]");
  // n is the remainder and the stored total is the exact sum of the parts,
  // so conservation holds identically (the total sits within one ulp of L)
  const double m = L * (1.0 - gamma / lambda);
  const double n = L - m;
  return {m + n, m, n};
}

/// |L - gamma * W| <= tol * max(1, L).
inline bool little_check(double L, double gamma, double W, double tol) {
  if (L < 0.0 || gamma < 0.0 || W < 0.0 || tol < 0.0)
    throw validation_error("little check: negative argument");
  return std::abs(L - gamma * W) <= tol * std::max(1.0, L);
}

/// Stationary probability of a multi-class queue state aggregated by per-class
/// counts: (1 - rho) * prod_c rho_c^{n_c} times the number of orderings of the
/// class sequence.
inline double product_form_prob(std::span<const double> rho_per_class,
                                std::span<const std::size_t> counts) {
  if (rho_per_class.size() != counts.size())
    throw validation_error("product form: class count mismatch");
  double rho_total = 0.0;
  for (double r : rho_per_class) {
    if (r < 0.0) throw validation_error("product form: negative intensity");
    rho_total += r;
  }
  if (!(rho_total < 1.0)) throw infeasible_error("product form: total intensity >= 1");

  double log_p = std::log1p(-rho_total);
  std::size_t total = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    total += counts[c];
    if (counts[c] > 0) {
      if (rho_per_class[c] <= 0.0) return 0.0;
      log_p += static_cast<double>(counts[c]) * std::log(rho_per_class[c]);
    }
  }
  // multinomial multiplicity of the aggregated state
  log_p += std::lgamma(static_cast<double>(total) + 1.0);
  for (std::size_t c : counts) log_p -= std::lgamma(static_cast<double>(c) + 1.0);
  return std::exp(log_p);
}

/// Parameters of one (node, class) pair in steady state.
struct NodeClassParams {
  double lambda = 0.0;  // arriving flow, bits/sec
  double mu = 0.0;      // transmit service rate, bits/sec
  double chi = std::numeric_limits<double>::infinity();  // compute service rate
  double k = 1.0;       // cost constant
  ComplexityClass cls = ComplexityClass::Search;
  double gamma = 0.0;   // generated flow, bits/sec
};

struct CostBreakdown {
  double comp = 0.0;
  double comm = 0.0;
  double total = 0.0;
  DelayMode mode = DelayMode::Additive;
};

/// Steady-state queue split implied by (lambda, gamma, mu): the transmit queue
/// holds gamma/(mu-gamma) on average, and the compute/transmit shares follow
/// the occupancy split at ratio gamma/lambda, giving L = lambda/(mu-gamma).
inline QueueDecomposition analytic_decomposition(double lambda, double gamma, double mu) {
  if (lambda <= 0.0) return {0.0, 0.0, 0.0};
  if (!(gamma < mu)) throw infeasible_error("decomposition: generated flow >= service rate");
  if (gamma < 0.0 || gamma > lambda * (1.0 + 1e-9))
    throw validation_error("decomposition: generated flow outside [0, lambda]");
  const double n = gamma / (mu - gamma);
  const double m = std::max(0.0, (lambda - gamma) / (mu - gamma));
  return {m + n, m, n};
}

/// Total per-packet delay for one (node, class): compute cost by complexity
/// class plus transmit cost, combined additively or as a pipeline maximum.
inline CostBreakdown node_class_cost(const NodeClassParams& p,
                                     DelayMode mode = DelayMode::Additive) {
  CostBreakdown out;
  out.mode = mode;
  if (p.lambda <= 0.0) return out;  // idle pair costs nothing

  out.comm = comm_delay(p.mu, p.gamma);
  if (p.cls == ComplexityClass::ExpService) {
    out.comp = comp_delay_exp_service(p.lambda, p.chi, p.k);
  } else {
    const QueueDecomposition q = analytic_decomposition(p.lambda, p.gamma, p.mu);
    out.comp = comp_delay(p.lambda, complexity(p.cls, q.compute, p.k));
  }
  out.total = mode == DelayMode::Additive ? out.comp + out.comm
                                          : std::max(out.comp, out.comm);
  return out;
}

}  // namespace fcnet
