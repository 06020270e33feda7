#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcnet/errors.hpp"
#include "fcnet/function_table.hpp"

namespace fcnet {

/// Undirected graph over one source alphabet. An edge joins two symbols that
/// the receiver must be able to tell apart. Simple adjacency-matrix storage;
/// alphabets here are small by construction.
class CharacteristicGraph {
 public:
  explicit CharacteristicGraph(std::vector<std::string> vertices)
      : vertices_(std::move(vertices)),
        adj_(vertices_.size(), std::vector<bool>(vertices_.size(), false)) {
    if (vertices_.empty()) throw validation_error("graph: empty vertex set");
  }

  std::size_t order() const { return vertices_.size(); }
  const std::vector<std::string>& vertices() const { return vertices_; }

  void add_edge(std::size_t u, std::size_t v) {
    check(u);
    check(v);
    if (u == v) throw validation_error("graph: self-loop");
    adj_[u][v] = adj_[v][u] = true;
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    check(u);
    check(v);
    return adj_[u][v];
  }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (std::size_t u = 0; u < order(); ++u)
      for (std::size_t v = u + 1; v < order(); ++v)
        if (adj_[u][v]) ++e;
    return e;
  }

  bool is_independent(std::span<const std::size_t> set) const {
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j)
        if (adj_[set[i]][set[j]]) return false;
    return true;
  }

 private:
  void check(std::size_t v) const {
    if (v >= vertices_.size()) throw validation_error("graph: vertex out of range");
  }

  std::vector<std::string> vertices_;
  std::vector<std::vector<bool>> adj_;
};

/// Builds the distinguishability graph of `table` on source `source_index`
/// (zero-based). Symbols u != v are joined iff some assignment of the other
/// sources has positive probability jointly with both u and v, and the
/// function values at (u, rest) and (v, rest) differ.
inline CharacteristicGraph build_characteristic_graph(const FunctionTable& table,
                                                      std::size_t source_index) {
  if (source_index >= table.arity())
    throw validation_error("characteristic graph: source index out of range");
  CharacteristicGraph g(table.alphabet(source_index));

  const auto& shape = table.joint().shape();
  const std::size_t k = table.arity();
  const std::size_t n = shape[source_index];

  std::vector<std::size_t> rest_axes;
  std::size_t rest_count = 1;
  for (std::size_t a = 0; a < k; ++a)
    if (a != source_index) {
      rest_axes.push_back(a);
      rest_count *= shape[a];
    }

  std::vector<std::size_t> tuple_u(k, 0), tuple_v(k, 0);
  for (std::size_t r = 0; r < rest_count; ++r) {
    std::size_t rem = r;
    for (std::size_t i = rest_axes.size(); i-- > 0;) {
      const std::size_t axis = rest_axes[i];
      tuple_u[axis] = tuple_v[axis] = rem % shape[axis];
      rem /= shape[axis];
    }
    for (std::size_t u = 0; u < n; ++u) {
      tuple_u[source_index] = u;
      if (table.joint().prob(tuple_u) <= 0.0) continue;
      for (std::size_t v = u + 1; v < n; ++v) {
        if (g.has_edge(u, v)) continue;
        tuple_v[source_index] = v;
        if (table.joint().prob(tuple_v) <= 0.0) continue;
        if (table.value(tuple_u) != table.value(tuple_v)) g.add_edge(u, v);
      }
    }
  }
  return g;
}

namespace detail {

inline void bron_kerbosch(const std::vector<std::uint64_t>& nbr, std::uint64_t r,
                          std::uint64_t p, std::uint64_t x,
                          std::vector<std::uint64_t>& out) {
  if (p == 0 && x == 0) {
    out.push_back(r);
    return;
  }
  // pivot on the P|X vertex with the most neighbours inside P
  const std::uint64_t px = p | x;
  int pivot = -1, best = -1;
  for (int v = 0; v < 64; ++v) {
    if (!(px >> v & 1)) continue;
    const int deg = std::popcount(p & nbr[v]);
    if (deg > best) {
      best = deg;
      pivot = v;
    }
  }
  std::uint64_t candidates = p & ~nbr[pivot];
  while (candidates) {
    const int v = std::countr_zero(candidates);
    candidates &= candidates - 1;
    const std::uint64_t bit = 1ull << v;
    bron_kerbosch(nbr, r | bit, p & nbr[v], x & nbr[v], out);
    p &= ~bit;
    x |= bit;
  }
}

}  // namespace detail

/// Enumerates all maximal independent sets of `g` as sorted vertex-index
/// lists, themselves sorted lexicographically. Works by enumerating maximal
/// cliques of the complement. Worst case is exponential, so the vertex count
/// is capped (default 20).
inline std::vector<std::vector<std::size_t>> maximal_independent_sets(
    const CharacteristicGraph& g, std::size_t vertex_cap = 20) {
  const std::size_t n = g.order();
  if (n > vertex_cap || n > 64)
    throw validation_error("independent sets: vertex count exceeds cap");

  std::vector<std::uint64_t> co_nbr(n, 0);  // complement adjacency
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && !g.has_edge(u, v)) co_nbr[u] |= 1ull << v;

  std::vector<std::uint64_t> found;
  const std::uint64_t all = n == 64 ? ~0ull : (1ull << n) - 1;
  detail::bron_kerbosch(co_nbr, 0, all, 0, found);

  std::vector<std::vector<std::size_t>> sets;
  sets.reserve(found.size());
  for (std::uint64_t mask : found) {
    std::vector<std::size_t> s;
    for (std::size_t v = 0; v < n; ++v)
      if (mask >> v & 1) s.push_back(v);
    sets.push_back(std::move(s));
  }
  std::sort(sets.begin(), sets.end());
  return sets;
}

}  // namespace fcnet
