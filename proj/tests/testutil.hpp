#pragma once

// Shared helpers for the unit and acceptance suites: an independent
// graph-entropy oracle and generators for random valid networks. Everything
// here is deliberately written from the defining formulas, not through the
// library's own solver paths.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fcnet/graph.hpp"
#include "fcnet/network.hpp"
#include "fcnet/pmf.hpp"

namespace testutil {

/// I(X;W) evaluated directly from a conditional p(w|x) over the given sets.
inline double mutual_information(const std::vector<double>& px,
                                 const std::vector<std::vector<double>>& cond) {
  const std::size_t n = px.size();
  const std::size_t s = cond[0].size();
  std::vector<double> q(s, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t w = 0; w < s; ++w) q[w] += px[x] * cond[x][w];
  double info = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t w = 0; w < s; ++w)
      if (px[x] > 0.0 && cond[x][w] > 0.0)
        info += px[x] * cond[x][w] * std::log2(cond[x][w] / q[w]);
  return info;
}

/// Brute-force minimiser of I(X;W) over conditionals supported on the
/// maximal independent sets containing each vertex: multi-start projected
/// coordinate descent with golden-section line searches on the simplex
/// weights. Slow and simple; exists only to check the production solver.
inline double graph_entropy_oracle(const fcnet::CharacteristicGraph& g,
                                   const std::vector<double>& px,
                                   int starts = 24, int sweeps = 400) {
  const auto sets = fcnet::maximal_independent_sets(g);
  const std::size_t n = g.order(), s = sets.size();
  std::vector<std::vector<std::size_t>> containing(n);
  for (std::size_t w = 0; w < s; ++w)
    for (std::size_t x : sets[w]) containing[x].push_back(w);

  std::mt19937_64 rng(12345);
  double best = std::numeric_limits<double>::infinity();
  for (int start = 0; start < starts; ++start) {
    std::vector<std::vector<double>> cond(n, std::vector<double>(s, 0.0));
    for (std::size_t x = 0; x < n; ++x) {
      double total = 0.0;
      for (std::size_t w : containing[x]) {
        cond[x][w] = start == 0 ? 1.0
                                : std::uniform_real_distribution<>(0.01, 1.0)(rng);
        total += cond[x][w];
      }
      for (std::size_t w : containing[x]) cond[x][w] /= total;
    }
    double value = mutual_information(px, cond);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      double improved = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        const auto& cx = containing[x];
        for (std::size_t j = 0; j + 1 < cx.size(); ++j) {
          // redistribute mass between set j and the rest, golden section on t
          const std::size_t wj = cx[j];
          const double mass_j = cond[x][wj];
          double rest = 0.0;
          for (std::size_t l = j + 1; l < cx.size(); ++l) rest += cond[x][cx[l]];
          const double pool = mass_j + rest;
          if (pool <= 0.0) continue;
          auto at = [&](double t) {
            auto trial = cond;
            trial[x][wj] = t * pool;
            for (std::size_t l = j + 1; l < cx.size(); ++l)
              trial[x][cx[l]] = rest > 0.0 ? cond[x][cx[l]] * (1.0 - t) * pool / rest
                                           : (1.0 - t) * pool /
                                                 static_cast<double>(cx.size() - j - 1);
            return mutual_information(px, trial);
          };
          double a = 0.0, b = 1.0;
          double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
          double f1 = at(x1), f2 = at(x2);
          for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
              b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = at(x1);
            } else {
              a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = at(x2);
            }
          }
          const double t = f1 < f2 ? x1 : x2;
          const double fv = std::min(f1, f2);
          if (fv < value - 1e-15) {
            improved += value - fv;
            cond[x][wj] = t * pool;
            for (std::size_t l = j + 1; l < cx.size(); ++l)
              cond[x][cx[l]] = rest > 0.0 ? cond[x][cx[l]] * (1.0 - t) * pool / rest
                                          : (1.0 - t) * pool /
                                                static_cast<double>(cx.size() - j - 1);
            value = mutual_information(px, cond);
          }
        }
      }
      if (improved < 1e-13) break;
    }
    best = std::min(best, value);
  }
  return best;
}

/// Random open multi-class network with upper-triangular class conversion,
/// departure mass of at least 0.15 per row, and light external load.
inline fcnet::NetworkSpec random_network(std::mt19937_64& rng, std::size_t max_nodes = 10,
                                         std::size_t max_classes = 4) {
  using namespace fcnet;
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<>(lo, hi)(rng);
  };
  const std::size_t N = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
  const std::size_t C = std::uniform_int_distribution<std::size_t>(1, max_classes)(rng);

  NetworkSpec net;
  net.name = "random";
  net.nodes = N;
  net.classes = C;
  net.beta.resize(N * C);
  net.mu.resize(N * C);
  net.chi.assign(N * C, std::numeric_limits<double>::infinity());
  net.k.assign(N * C, 1.0);
  net.cls.assign(N * C, ComplexityClass::Search);
  for (std::size_t i = 0; i < N * C; ++i) {
    net.beta[i] = uniform(0.0, 0.4);
    net.mu[i] = uniform(30.0, 60.0);
  }
  for (std::size_t c = 0; c < C; ++c) net.gamma_surj.push_back(uniform(0.0, 1.0));
  for (std::size_t v = 0; v < N; ++v) net.node_names.push_back("n" + std::to_string(v));
  for (std::size_t c = 0; c < C; ++c) net.class_names.push_back("c" + std::to_string(c));

  net.routing = RoutingPolicy(N, C);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t v = 0; v < N; ++v) {
      const double depart = uniform(0.15, 0.8);
      std::vector<double> weights;
      double total = 0.0;
      for (std::size_t w = 0; w < N; ++w)
        for (std::size_t c2 = c; c2 < C; ++c2) {
          const double raw = uniform(0.0, 1.0);
          weights.push_back(raw);
          total += raw;
        }
      std::size_t idx = 0;
      for (std::size_t w = 0; w < N; ++w)
        for (std::size_t c2 = c; c2 < C; ++c2)
          net.routing.move(c, v, w, c2) =
              total > 0.0 ? (1.0 - depart) * weights[idx++] / total : 0.0;
      net.routing.depart(c, v) = total > 0.0 ? depart : 1.0;
    }
  return net;
}

}  // namespace testutil
