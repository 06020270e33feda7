// Command-line front end: loads a scenario file, dispatches one analysis
// subcommand, and writes the resulting tables as CSV artifacts.
//
// Exit codes: 0 success, 2 scenario validation failure, 3 infeasible model,
// 4 solver non-convergence.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fcnet/analysis.hpp"
#include "fcnet/csv.hpp"
#include "fcnet/desim.hpp"
#include "fcnet/flownet.hpp"
#include "fcnet/graph_entropy.hpp"
#include "fcnet/markov.hpp"
#include "fcnet/network.hpp"
#include "fcnet/optimizer.hpp"
#include "fcnet/queueing.hpp"
#include "fcnet/scenario.hpp"
#include "fcnet/sweep.hpp"

namespace {

using namespace fcnet;
namespace fs = std::filesystem;

struct CliArgs {
  std::string scenario_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;  // 0 = keep the scenario's seed
  int jobs = 1;
  std::string format = "csv";
  double tol = 0.05;
};

fs::path out_file(const CliArgs& args, const Scenario& sc, const std::string& what) {
  fs::create_directories(args.out_dir);
  return fs::path(args.out_dir) / (sc.name + "_" + what + ".csv");
}

std::uint64_t effective_seed(const CliArgs& args, const Scenario& sc) {
  return args.seed ? args.seed : sc.seed;
}

const char* flag(bool b) { return b ? "yes" : "no"; }

void add_surjectivity_comment(CsvTable& table, const NetworkSpec& net) {
  std::string line = "surjectivity:";
  for (std::size_t c = 0; c < net.classes; ++c)
    line += " " + net.class_names[c] + "=" + csv_number(net.gamma_surj[c]);
  table.comment(line);
}

int run_entropy(const CliArgs& args, const Scenario& sc) {
  CsvTable table("entropy", {"class", "origin", "h_source_bits", "h_graph_bits",
                             "surjectivity", "mis_count", "iterations", "converged"});
  add_surjectivity_comment(table, sc.net);
  bool all_converged = true;
  for (const auto& cs : sc.class_specs) {
    table.row() << cs.name << (cs.derived ? "table" : "direct") << cs.h_source
                << cs.h_graph << cs.gamma_surj << cs.mis_count << cs.iterations
                << flag(!cs.derived || cs.converged);
    if (cs.derived && !cs.converged) all_converged = false;
  }
  table.write(out_file(args, sc, "entropy"));
  std::cout << "entropy: " << sc.class_specs.size() << " classes -> "
            << out_file(args, sc, "entropy").string() << "\n";
  return all_converged ? 0 : 4;
}

int run_analyze(const CliArgs& args, const Scenario& sc) {
  const NetworkSpec& net = sc.net;
  const FlowSolution flow = solve_traffic(net, TrafficMode::Equality);

  CsvTable table("analyze_flows",
                 {"node", "class", "lambda", "gamma", "rho", "sigma", "m", "n", "L",
                  "w_comp", "w_comm", "w_total"});
  add_surjectivity_comment(table, net);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double total_cost = 0.0;
  bool costs_ok = true;
  for (std::size_t v = 0; v < net.nodes; ++v)
    for (std::size_t c = 0; c < net.classes; ++c) {
      const std::size_t i = net.idx(v, c);
      const double lam = flow.lambda[i], gam = flow.gamma[i];
      double m = nan, n = nan, L = nan, wcomp = nan, wcomm = nan, wtot = nan;
      const double rho = gam / net.mu[i];
      const double sigma = std::isfinite(net.chi[i]) ? lam / net.chi[i] : 0.0;
      try {
        const auto q = analytic_decomposition(lam, gam, net.mu[i]);
        m = q.compute;
        n = q.comm;
        L = q.total;
        const auto cost = node_class_cost(net.params(v, c, lam, gam), net.delay_mode);
        wcomp = cost.comp;
        wcomm = cost.comm;
        wtot = cost.total;
        total_cost += wtot;
      } catch (const std::exception&) {
        costs_ok = false;
      }
      table.row() << net.node_names[v] << net.class_names[c] << lam << gam << rho
                  << sigma << m << n << L << wcomp << wcomm << wtot;
    }
  table.write(out_file(args, sc, "flows"));

  double entropy_rate = nan;
  try {
    const Mat chain = conversion_chain(net);
    const auto pi = stationary_distribution(chain, 1e-12);
    entropy_rate = dtmc_entropy_rate(chain, pi);
  } catch (const std::exception&) {
    // undefined for degenerate routings; leave the column empty
  }
  CsvTable summary("analyze_summary", {"total_cost", "residual", "feasible",
                                       "routing_entropy_bits"});
  summary.row() << (costs_ok ? total_cost : nan) << flow.residual
                << flag(flow.feasible && costs_ok) << entropy_rate;
  summary.write(out_file(args, sc, "summary"));

  if (sc.allocation) {
    const auto& a = *sc.allocation;
    CsvTable alloc("allocation_cost",
                   {"n_bits", "node_count", "intermediate_count", "compute_cost",
                    "comm_cost", "total_cost"});
    for (std::size_t w : a.intermediate_grid) {
      const auto cost = bisection_allocation_cost(a.n_bits, a.node_count, w);
      alloc.row() << a.n_bits << a.node_count << w << cost.compute << cost.comm
                  << cost.compute + cost.comm;
    }
    alloc.write(out_file(args, sc, "allocation"));
  }
  if (sc.split) {
    const auto& s = *sc.split;
    CsvTable split("split_cost", {"n_bits", "workers", "split_cost", "central_cost",
                                  "min_workers"});
    for (std::size_t w : s.worker_grid) {
      const auto cost = classification_split_cost(s.n_bits, w);
      split.row() << s.n_bits << w << cost.split << cost.central << cost.min_workers;
    }
    split.write(out_file(args, sc, "split"));
  }

  std::cout << "analyze: residual " << csv_number(flow.residual) << ", total cost "
            << csv_number(total_cost) << ", feasible " << flag(flow.feasible) << "\n";
  if (!flow.feasible || !costs_ok) {
    std::cerr << "analyze: network is infeasible at the compressed operating point\n";
    return 3;
  }
  return 0;
}

int run_threshold(const CliArgs& args, const Scenario& sc) {
  std::vector<double> grid;
  if (sc.threshold) {
    grid = sc.threshold->L_grid;
  } else {
    for (int i = 0; i < 50; ++i) grid.push_back(2.0 + static_cast<double>(i));
  }
  CsvTable table("threshold", {"L", "class", "rho_th"});
  add_surjectivity_comment(table, sc.net);
  for (double L : grid)
    for (std::size_t c = 0; c < sc.net.classes; ++c) {
      double rho = std::numeric_limits<double>::quiet_NaN();
      try {
        const double m = L * (1.0 - sc.net.gamma_surj[c]);
        const double d = complexity(sc.class_specs[c].cls, m, sc.class_specs[c].k);
        rho = load_threshold(d, sc.net.gamma_surj[c]).rho_th;
      } catch (const std::exception&) {
        // rate-based classes have no size-based threshold
      }
      table.row() << L << sc.net.class_names[c] << rho;
    }
  table.write(out_file(args, sc, "threshold"));
  std::cout << "threshold: " << grid.size() << " occupancy points -> "
            << out_file(args, sc, "threshold").string() << "\n";
  return 0;
}

int run_bounds(const CliArgs& args, const Scenario& sc) {
  const NetworkSpec& net = sc.net;
  const FlowSolution flow = solve_traffic(net, TrafficMode::Equality);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvTable table("bounds",
                 {"node", "class", "lambda", "mu", "d", "b_minus", "b_plus",
                  "L_little_lower", "L_little_upper", "regime", "L_flow_lower",
                  "L_flow_upper", "gamma_min", "surj_ceiling"});
  for (std::size_t v = 0; v < net.nodes; ++v)
    for (std::size_t c = 0; c < net.classes; ++c) {
      const std::size_t i = net.idx(v, c);
      const double lam = flow.lambda[i], gam = flow.gamma[i], mu = net.mu[i];
      double d = nan, bm = nan, bp = nan, llo = nan, lhi = nan;
      double flo = nan, fhi = nan, gmin = nan, ceil = nan;
      std::string regime = "-";
      try {
        d = complexity(net.cls[i], analytic_decomposition(lam, gam, mu).compute, net.k[i]);
        if (d > 0.0 && lam > 0.0 && lam < mu) {
          const auto lb = little_L_bounds(lam, mu, d);
          bm = lb.b_minus;
          bp = lb.b_plus;
          llo = lb.lower;
          lhi = lb.upper;
          regime = to_string(lb.regime);
        }
      } catch (const std::exception&) {
      }
      try {
        if (lam > 0.0 && lam < mu) {
          const auto fb = flow_L_bounds(net.gamma_surj[c] * lam, lam, mu, lam);
          flo = fb.lower;
          fhi = fb.upper;
          gmin = fb.gamma_min;
          ceil = fb.upper_surj;
        }
      } catch (const std::exception&) {
      }
      table.row() << net.node_names[v] << net.class_names[c] << lam << mu << d << bm
                  << bp << llo << lhi << regime << flo << fhi << gmin << ceil;
    }
  table.write(out_file(args, sc, "bounds"));
  std::cout << "bounds: " << net.pairs() << " rows -> "
            << out_file(args, sc, "bounds").string() << "\n";
  return 0;
}

int run_optimize(const CliArgs& args, const Scenario& sc) {
  SolverOptions opts;
  opts.seed = effective_seed(args, sc);
  const auto [obj, flow] = min_cost(sc.net, opts);
  const double baseline = comms_cost(sc.net);

  CsvTable summary("optimize", {"min_cost", "comms_cost", "gap", "feasible",
                                "converged", "active_constraints"});
  std::string active;
  for (const auto& a : obj.active_constraints) {
    if (!active.empty()) active += "; ";
    active += a;
  }
  summary.row() << obj.total << baseline << baseline - obj.total << flag(obj.feasible)
                << flag(obj.converged) << active;
  summary.write(out_file(args, sc, "optimize"));

  CsvTable table("optimize_flows", {"node", "class", "lambda", "gamma", "w_comp",
                                    "w_comm", "w_total"});
  for (std::size_t v = 0; v < sc.net.nodes; ++v)
    for (std::size_t c = 0; c < sc.net.classes; ++c) {
      const std::size_t i = sc.net.idx(v, c);
      const auto& cost = obj.per_node_class[i];
      table.row() << sc.net.node_names[v] << sc.net.class_names[c] << flow.lambda[i]
                  << flow.gamma[i] << cost.comp << cost.comm << cost.total;
    }
  table.write(out_file(args, sc, "optimize_flows"));

  std::cout << "optimize: min cost " << csv_number(obj.total) << " vs baseline "
            << csv_number(baseline) << "\n";
  return obj.converged ? 0 : 4;
}

int run_simulate(const CliArgs& args, const Scenario& sc) {
  SimConfig cfg;
  cfg.net = sc.net;
  cfg.horizon_departures = sc.sim.horizon_departures;
  cfg.horizon_time = sc.sim.horizon_time;
  cfg.warmup_fraction = sc.sim.warmup;
  cfg.slot_duration = sc.sim.slot;
  cfg.seed = effective_seed(args, sc);
  const SimStats stats = run_simulation(cfg);
  const FlowSolution flow = solve_traffic(sc.net, TrafficMode::Equality);

  CsvTable table("sim_stats",
                 {"node", "class", "L", "m", "n", "throughput", "sojourn_mean",
                  "entries", "exits", "terminated", "departed", "routed"});
  for (std::size_t v = 0; v < sc.net.nodes; ++v)
    for (std::size_t c = 0; c < sc.net.classes; ++c) {
      const auto& s = stats.per_pair[sc.net.idx(v, c)];
      table.row() << sc.net.node_names[v] << sc.net.class_names[c] << s.L << s.m
                  << s.n << s.throughput << s.sojourn_mean << s.entries << s.exits
                  << s.terminated << s.departed << s.routed;
    }
  table.write(out_file(args, sc, "sim_stats"));

  CsvTable checks("sim_checks", {"node", "class", "quantity", "simulated",
                                 "expected", "rel_error", "pass"});
  bool pass = true;
  const auto littles = empirical_little_check(stats, args.tol);
  const auto compare = compare_to_analytic(stats, flow, sc.net, args.tol);
  for (const auto* rep : {&littles, &compare}) {
    pass = pass && rep->pass;
    for (const auto& row : rep->rows)
      checks.row() << sc.net.node_names[row.node] << sc.net.class_names[row.cls]
                   << row.quantity << row.simulated << row.expected << row.rel_error
                   << flag(row.pass);
  }
  checks.write(out_file(args, sc, "sim_checks"));

  std::cout << "simulate: " << stats.total_departures << " departures over "
            << csv_number(stats.sim_time) << "s, checks "
            << (pass ? "pass" : "FAIL") << " at tol " << args.tol << "\n";
  return 0;
}

int run_sweep_cmd(const CliArgs& args, const Scenario& sc) {
  if (!sc.sweep) throw validation_error("sweep: scenario declares no sweep block");
  SolverOptions opts;
  opts.seed = effective_seed(args, sc);
  const SweepResult result = run_sweep(sc, *sc.sweep, opts, args.jobs);

  std::vector<std::string> header{"parameter", "value", "status", "min_cost",
                                  "comms_cost"};
  for (const auto& name : sc.net.class_names) header.push_back("rho_th_" + name);
  for (const auto& name : sc.net.class_names) header.push_back("L_lower_" + name);
  for (const auto& name : sc.net.class_names) header.push_back("L_upper_" + name);
  CsvTable table("sweep", std::move(header));
  add_surjectivity_comment(table, sc.net);
  for (const auto& row : result.rows) {
    auto r = table.row();
    r << result.parameter << row.value << row.status << row.min_cost << row.comms_cost;
    for (double x : row.rho_th) r << x;
    for (double x : row.l_lower) r << x;
    for (double x : row.l_upper) r << x;
  }
  table.write(out_file(args, sc, "sweep"));
  std::cout << "sweep over " << result.parameter << ": " << result.rows.size()
            << " points -> " << out_file(args, sc, "sweep").string() << "\n";
  return 0;
}

int run_compare(const CliArgs& args, const Scenario& sc) {
  SolverOptions opts;
  opts.seed = effective_seed(args, sc);
  const MixComparison cmp = compare_separate_vs_mixed(sc.net, opts);

  CsvTable table("compare", {"configuration", "feasible", "total_cost", "node",
                             "node_L"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto emit = [&](const char* config, bool feasible, const Objective& obj,
                  const std::vector<double>& L) {
    for (std::size_t v = 0; v < sc.net.nodes; ++v)
      table.row() << config << flag(feasible) << (feasible ? obj.total : nan)
                  << sc.net.node_names[v] << (v < L.size() ? L[v] : nan);
  };
  emit("separate", cmp.separate_feasible, cmp.separate, cmp.separate_node_L);
  emit("mixed", cmp.mixed_feasible, cmp.mixed, cmp.mixed_node_L);
  table.write(out_file(args, sc, "compare"));

  std::cout << "compare: separate ";
  if (cmp.separate_feasible)
    std::cout << csv_number(cmp.separate.total);
  else
    std::cout << "infeasible";
  std::cout << ", mixed ";
  if (cmp.mixed_feasible)
    std::cout << csv_number(cmp.mixed.total);
  else
    std::cout << "infeasible";
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic and simulated delay analysis of in-network computation"};
  app.require_subcommand(1);

  CliArgs args;
  app.add_option("--scenario", args.scenario_path, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", args.out_dir, "Output directory for CSV artifacts");
  app.add_option("--seed", args.seed, "Override the scenario seed");
  app.add_option("--jobs", args.jobs, "Parallel workers for sweeps");
  app.add_option("--format", args.format, "Output format (csv)");
  app.add_option("--tol", args.tol, "Relative tolerance for simulation checks");

  auto* c_entropy = app.add_subcommand("entropy", "Graph entropy and surjectivity per class");
  auto* c_analyze = app.add_subcommand("analyze", "Traffic solve plus per-pair delay costs");
  auto* c_threshold = app.add_subcommand("threshold", "Computing-load thresholds over an occupancy grid");
  auto* c_bounds = app.add_subcommand("bounds", "Occupancy bounds per (node, class)");
  auto* c_optimize = app.add_subcommand("optimize", "Minimise total delay over generated flows");
  auto* c_simulate = app.add_subcommand("simulate", "Event simulation with analytic cross-checks");
  auto* c_sweep = app.add_subcommand("sweep", "Evaluate the scenario's declared parameter sweep");
  auto* c_compare = app.add_subcommand("compare", "Separated versus mixed class placement");

  CLI11_PARSE(app, argc, argv);

  try {
    if (args.format != "csv") {
      std::cerr << "unsupported output format '" << args.format << "'\n";
      return 2;
    }
    const Scenario sc = fcnet::load_scenario(args.scenario_path);
    if (c_entropy->parsed()) return run_entropy(args, sc);
    if (c_analyze->parsed()) return run_analyze(args, sc);
    if (c_threshold->parsed()) return run_threshold(args, sc);
    if (c_bounds->parsed()) return run_bounds(args, sc);
    if (c_optimize->parsed()) return run_optimize(args, sc);
    if (c_simulate->parsed()) return run_simulate(args, sc);
    if (c_sweep->parsed()) return run_sweep_cmd(args, sc);
    if (c_compare->parsed()) return run_compare(args, sc);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const fcnet::validation_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const fcnet::infeasible_error& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const fcnet::nonconvergence_error& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
