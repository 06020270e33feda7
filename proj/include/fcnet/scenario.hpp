#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fcnet/errors.hpp"
#include "fcnet/function_table.hpp"
#include "fcnet/graph.hpp"
#include "fcnet/graph_entropy.hpp"
#include "fcnet/network.hpp"

namespace fcnet {

/// Per-class declaration: a complexity model plus either a directly supplied
/// surjectivity or a function table it is derived from.
struct ClassSpec {
  std::string name;
  ComplexityClass cls = ComplexityClass::Search;
  double k = 1.0;
  double chi = std::numeric_limits<double>::infinity();
  double gamma_surj = 0.0;
  bool derived = false;          // surjectivity computed from a function table
  std::size_t source_index = 0;  // which source's alphabet the graph was built on
  double h_source = std::numeric_limits<double>::quiet_NaN();
  double h_graph = std::numeric_limits<double>::quiet_NaN();
  std::size_t mis_count = 0;
  int iterations = 0;
  bool converged = false;
};

struct SweepDecl {
  std::string parameter;  // one of mu, beta, Gamma, L, k
  std::vector<double> grid;
  bool scale_beta = false;  // couple external rates to a mu sweep
};

struct ThresholdDecl {
  std::vector<double> L_grid;
};

struct AllocationDecl {
  double n_bits = 0.0;
  std::size_t node_count = 0;
  std::vector<std::size_t> intermediate_grid;
};

struct SplitDecl {
  double n_bits = 0.0;
  std::vector<std::size_t> worker_grid;
};

struct SimDecl {
  std::uint64_t horizon_departures = 200000;
  double horizon_time = 0.0;
  double warmup = 0.2;
  double slot = 1.0;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  NetworkSpec net;
  std::vector<ClassSpec> class_specs;
  std::optional<SweepDecl> sweep;
  std::optional<ThresholdDecl> threshold;
  std::optional<AllocationDecl> allocation;
  std::optional<SplitDecl> split;
  SimDecl sim;
};

namespace detail {

using json = nlohmann::json;

inline validation_error field_error(const std::string& where, const std::string& what) {
  return validation_error("scenario: " + where + ": " + what);
}

/// Accepts a scalar, a per-node array, or a per-node-per-class matrix and
/// always hands back the flattened (node, class) expansion.
inline std::vector<double> expand_rates(const json& j, std::size_t nodes,
                                        std::size_t classes, const std::string& where) {
  std::vector<double> out(nodes * classes, 0.0);
  if (j.is_number()) {
    std::fill(out.begin(), out.end(), j.get<double>());
    return out;
  }
  if (!j.is_array()) throw field_error(where, "expected number or array");
  if (j.size() != nodes) throw field_error(where, "outer size must equal the node count");
  for (std::size_t v = 0; v < nodes; ++v) {
    if (j[v].is_number()) {
      for (std::size_t c = 0; c < classes; ++c) out[v * classes + c] = j[v].get<double>();
    } else if (j[v].is_array() && j[v].size() == classes) {
      for (std::size_t c = 0; c < classes; ++c) out[v * classes + c] = j[v][c].get<double>();
    } else {
      throw field_error(where, "row " + std::to_string(v) + " must be a number or a per-class array");
    }
  }
  return out;
}

inline ComplexityClass parse_complexity(const std::string& s, const std::string& where) {
  if (s == "search") return ComplexityClass::Search;
  if (s == "mapreduce") return ComplexityClass::MapReduce;
  if (s == "classification") return ComplexityClass::Classification;
  if (s == "exp_service") return ComplexityClass::ExpService;
  throw field_error(where, "unknown complexity class '" + s + "'");
}

inline std::size_t index_of(const std::vector<std::string>& names, const std::string& s,
                            const std::string& where) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == s) return i;
  throw field_error(where, "unknown name '" + s + "'");
}

inline ClassSpec parse_class(const json& j, std::size_t index) {
  const std::string where = "classes[" + std::to_string(index) + "]";
  ClassSpec cs;
  cs.name = j.value("name", "c" + std::to_string(index));
  cs.cls = parse_complexity(j.value("complexity", "search"), where);
  cs.k = j.value("k", 1.0);
  cs.chi = j.value("chi", std::numeric_limits<double>::infinity());

  const bool has_direct = j.contains("gamma_surj");
  const bool has_table = j.contains("function");
  if (!has_direct && !has_table)
    throw field_error(where, "needs either gamma_surj or a function table");
  if (has_direct) {
    cs.gamma_surj = j.at("gamma_surj").get<double>();
    if (cs.gamma_surj < 0.0 || cs.gamma_surj > 1.0)
      throw field_error(where, "gamma_surj outside [0, 1]");
  }
  if (has_table) {
    const json& f = j.at("function");
    std::vector<std::vector<std::string>> alphabets;
    for (const auto& a : f.at("alphabets"))
      alphabets.push_back(a.get<std::vector<std::string>>());
    auto outputs = f.at("outputs").get<std::vector<std::string>>();
    auto probs = f.at("pmf").get<std::vector<double>>();
    cs.source_index = f.value("source", 0);
    try {
      const FunctionTable table(std::move(alphabets), std::move(outputs), std::move(probs));
      const auto graph = build_characteristic_graph(table, cs.source_index);
      const Pmf marginal = table.marginal(cs.source_index);
      const auto sets = maximal_independent_sets(graph);
      const auto result = graph_entropy(graph, marginal);
      cs.h_source = source_entropy(marginal);
      cs.h_graph = result.value_bits;
      cs.mis_count = sets.size();
      cs.iterations = result.iterations;
      cs.converged = result.converged;
      cs.derived = true;
      cs.gamma_surj = entropic_surjectivity(cs.h_graph, cs.h_source);
    } catch (const validation_error& e) {
      throw field_error(where + ".function", e.what());
    }
  }
  return cs;
}

}  // namespace detail

/// Parses and fully validates a scenario file (JSON, // comments allowed).
/// Surjectivities declared through function tables are derived here, so the
/// returned network is ready for every downstream operation.
inline Scenario load_scenario(const std::filesystem::path& path) {
  using detail::field_error;
  using nlohmann::json;

  std::ifstream in(path);
  if (!in) throw validation_error("scenario: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw validation_error("scenario: " + path.string() + ": " + e.what());
  }

  Scenario sc;
  try {
    sc.name = j.value("name", path.stem().string());
    sc.seed = j.value("seed", 1ull);

    auto node_names = j.at("nodes").get<std::vector<std::string>>();
    const std::size_t N = node_names.size();
    if (N == 0) throw field_error("nodes", "at least one node required");

    if (!j.contains("classes") || !j.at("classes").is_array() || j.at("classes").empty())
      throw field_error("classes", "at least one class required");
    for (std::size_t c = 0; c < j.at("classes").size(); ++c)
      sc.class_specs.push_back(detail::parse_class(j.at("classes")[c], c));
    const std::size_t C = sc.class_specs.size();

    NetworkSpec& net = sc.net;
    net.name = sc.name;
    net.nodes = N;
    net.classes = C;
    net.node_names = node_names;
    for (const auto& cs : sc.class_specs) {
      net.class_names.push_back(cs.name);
      net.gamma_surj.push_back(cs.gamma_surj);
    }
    net.mu = detail::expand_rates(j.at("mu"), N, C, "mu");

    net.chi.assign(N * C, 0.0);
    net.k.assign(N * C, 0.0);
    net.cls.assign(N * C, ComplexityClass::Search);
    for (std::size_t v = 0; v < N; ++v)
      for (std::size_t c = 0; c < C; ++c) {
        net.chi[net.idx(v, c)] = sc.class_specs[c].chi;
        net.k[net.idx(v, c)] = sc.class_specs[c].k;
        net.cls[net.idx(v, c)] = sc.class_specs[c].cls;
      }
    if (j.contains("chi")) net.chi = detail::expand_rates(j.at("chi"), N, C, "chi");
    if (j.contains("k")) net.k = detail::expand_rates(j.at("k"), N, C, "k");

    // external arrivals: a full matrix, or class totals with a source split
    const json& jb = j.at("beta");
    if (jb.is_object()) {
      auto totals = jb.at("total").get<std::vector<double>>();
      if (totals.size() != C) throw field_error("beta.total", "one entry per class required");
      net.beta.assign(N * C, 0.0);
      net.routing.source_p.assign(C * N, 0.0);
      if (jb.contains("split") && jb.at("split").is_string()) {
        if (jb.at("split").get<std::string>() != "uniform")
          throw field_error("beta.split", "unknown split keyword");
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t v = 0; v < N; ++v) {
            net.beta[net.idx(v, c)] = totals[c] / static_cast<double>(N);
            net.routing.source_p[c * N + v] = 1.0 / static_cast<double>(N);
          }
      } else {
        const json& split = jb.at("split");  // [class][node]
        if (!split.is_array() || split.size() != C)
          throw field_error("beta.split", "expected one row per class");
        for (std::size_t c = 0; c < C; ++c) {
          if (split[c].size() != N)
            throw field_error("beta.split", "row " + std::to_string(c) + " must cover all nodes");
          for (std::size_t v = 0; v < N; ++v) {
            const double p = split[c][v].get<double>();
            net.beta[net.idx(v, c)] = totals[c] * p;
            net.routing.source_p[c * N + v] = p;
          }
        }
      }
    } else {
      net.beta = detail::expand_rates(jb, N, C, "beta");
    }

    // routing: a named preset or an explicit move/depart listing
    const json& jr = j.at("routing");
    RoutingPolicy pol(N, C);
    pol.source_p = net.routing.source_p;  // keep any split recorded above
    if (jr.contains("preset")) {
      const std::string preset = jr.at("preset").get<std::string>();
      if (preset == "isolated") {
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t v = 0; v < N; ++v) pol.depart(c, v) = 1.0;
      } else if (preset == "mixing") {
        // depart with probability equal to the class surjectivity, spread the
        // remainder uniformly (self-loop included), class preserved
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t v = 0; v < N; ++v) {
            pol.depart(c, v) = net.gamma_surj[c];
            const double stay = (1.0 - net.gamma_surj[c]) / static_cast<double>(N);
            for (std::size_t w = 0; w < N; ++w) pol.move(c, v, w, c) = stay;
          }
      } else {
        throw field_error("routing.preset", "unknown preset '" + preset + "'");
      }
    } else {
      if (jr.contains("moves"))
        for (const auto& mv : jr.at("moves")) {
          const std::size_t v =
              detail::index_of(node_names, mv.at("from").get<std::string>(), "routing.moves.from");
          const std::size_t w =
              detail::index_of(node_names, mv.at("to").get<std::string>(), "routing.moves.to");
          const std::size_t c = detail::index_of(
              net.class_names, mv.at("class").get<std::string>(), "routing.moves.class");
          const std::size_t c2 =
              mv.contains("to_class")
                  ? detail::index_of(net.class_names, mv.at("to_class").get<std::string>(),
                                     "routing.moves.to_class")
                  : c;
          pol.move(c, v, w, c2) = mv.at("p").get<double>();
        }
      if (jr.contains("depart")) {
        const auto dep = detail::expand_rates(jr.at("depart"), N, C, "routing.depart");
        for (std::size_t v = 0; v < N; ++v)
          for (std::size_t c = 0; c < C; ++c) pol.depart(c, v) = dep[v * C + c];
      } else {
        // infer departure as the leftover mass per row
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t v = 0; v < N; ++v) {
            double used = 0.0;
            for (std::size_t w = 0; w < N; ++w)
              for (std::size_t c2 = 0; c2 < C; ++c2) used += pol.move(c, v, w, c2);
            if (used > 1.0 + 1e-9)
              throw field_error("routing.moves", "row mass exceeds 1 at node " +
                                                     node_names[v] + ", class " +
                                                     net.class_names[c]);
            pol.depart(c, v) = 1.0 - used;
          }
      }
    }
    net.routing = std::move(pol);

    if (j.contains("delay_mode")) {
      const std::string m = j.at("delay_mode").get<std::string>();
      if (m == "additive")
        net.delay_mode = DelayMode::Additive;
      else if (m == "pipelined")
        net.delay_mode = DelayMode::Pipelined;
      else
        throw field_error("delay_mode", "expected 'additive' or 'pipelined'");
    }

    if (j.contains("sweep")) {
      const json& js = j.at("sweep");
      SweepDecl d;
      d.parameter = js.at("parameter").get<std::string>();
      d.grid = js.at("grid").get<std::vector<double>>();
      d.scale_beta = js.value("scale_beta", false);
      if (d.parameter != "mu" && d.parameter != "beta" && d.parameter != "Gamma" &&
          d.parameter != "L" && d.parameter != "k")
        throw field_error("sweep.parameter", "must be one of mu, beta, Gamma, L, k");
      sc.sweep = std::move(d);
    }
    if (j.contains("threshold")) {
      const json& jt = j.at("threshold");
      ThresholdDecl d;
      if (jt.contains("L_grid")) {
        d.L_grid = jt.at("L_grid").get<std::vector<double>>();
      } else {
        const double from = jt.at("L_from").get<double>();
        const double to = jt.at("L_to").get<double>();
        const std::size_t points = jt.at("points").get<std::size_t>();
        if (points < 2 || to <= from) throw field_error("threshold", "bad grid bounds");
        for (std::size_t i = 0; i < points; ++i)
          d.L_grid.push_back(from + (to - from) * static_cast<double>(i) /
                                        static_cast<double>(points - 1));
      }
      sc.threshold = std::move(d);
    }
    if (j.contains("allocation")) {
      const json& ja = j.at("allocation");
      AllocationDecl d;
      d.n_bits = ja.at("n_bits").get<double>();
      d.node_count = ja.at("node_count").get<std::size_t>();
      d.intermediate_grid = ja.at("intermediate_grid").get<std::vector<std::size_t>>();
      sc.allocation = std::move(d);
    }
    if (j.contains("classification_split")) {
      const json& js = j.at("classification_split");
      SplitDecl d;
      d.n_bits = js.at("n_bits").get<double>();
      d.worker_grid = js.at("worker_grid").get<std::vector<std::size_t>>();
      sc.split = std::move(d);
    }
    if (j.contains("sim")) {
      const json& js = j.at("sim");
      sc.sim.horizon_time = js.value("horizon_time", 0.0);
      // a pure time horizon disables the default departure count
      const std::uint64_t default_departures =
          sc.sim.horizon_time > 0.0 ? 0 : sc.sim.horizon_departures;
      sc.sim.horizon_departures = js.value("horizon_departures", default_departures);
      sc.sim.warmup = js.value("warmup", 0.2);
      sc.sim.slot = js.value("slot", 1.0);
    }
  } catch (const json::exception& e) {
    throw validation_error("scenario: " + path.string() + ": " + e.what());
  }

  const auto violations = validate_network(sc.net);
  if (!violations.empty()) {
    std::string msg = "scenario: " + path.string() + " failed validation:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw validation_error(msg);
  }
  return sc;
}

}  // namespace fcnet
