#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "fcnet/analysis.hpp"
#include "fcnet/optimizer.hpp"
#include "fcnet/scenario.hpp"

namespace fcnet {

struct SweepRow {
  double value = 0.0;
  std::string status = "ok";
  double min_cost = std::numeric_limits<double>::quiet_NaN();
  double comms_cost = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rho_th;    // per class
  std::vector<double> l_lower;   // per class, compression-floor occupancy
  std::vector<double> l_upper;   // per class, no-computation occupancy
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepRow> rows;
};

namespace detail {

inline NetworkSpec apply_parameter(const Scenario& sc, const std::string& parameter,
                                   double value, bool scale_beta) {
  NetworkSpec net = sc.net;
  if (parameter == "mu") {
    const double base = net.mu.empty() ? 1.0 : net.mu[0];
    for (double& m : net.mu) m = value;
    if (scale_beta && base > 0.0)
      for (double& b : net.beta) b *= value / base;
  } else if (parameter == "beta") {
    for (double& b : net.beta) b *= value;
  } else if (parameter == "Gamma") {
    for (double& g : net.gamma_surj) g = value;
  } else if (parameter == "k") {
    for (double& kk : net.k) kk = value;
  } else if (parameter != "L") {
    throw validation_error("sweep: unknown parameter '" + parameter + "'");
  }
  return net;
}

/// Per-class threshold and occupancy-window columns, evaluated at node 0 of
/// the fully compressed operating point (or at a supplied occupancy for L
/// sweeps). Columns that do not apply to a class come back as NaN.
inline void fill_class_columns(const NetworkSpec& net, const FlowSolution& flow,
                               double L_override, SweepRow& row) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t c = 0; c < net.classes; ++c) {
    const std::size_t i = net.idx(0, c);
    double rho_th = nan, l_lo = nan, l_hi = nan;
    try {
      const double lam = flow.lambda[i], gam = flow.gamma[i], mu = net.mu[i];
      double m;
      if (L_override > 0.0) {
        m = L_override * (1.0 - net.gamma_surj[c]);
      } else {
        m = analytic_decomposition(lam, gam, mu).compute;
      }
      const double d = complexity(net.cls[i], m, net.k[i]);
      rho_th = load_threshold(d, net.gamma_surj[c]).rho_th;
      if (lam > 0.0 && lam < mu) {
        const auto fb = flow_L_bounds(net.gamma_surj[c] * lam, lam, mu, lam);
        l_lo = fb.lower;
        l_hi = fb.upper;
      }
    } catch (const std::exception&) {
      // leave the column empty for classes where the quantity is undefined
    }
    row.rho_th.push_back(rho_th);
    row.l_lower.push_back(l_lo);
    row.l_upper.push_back(l_hi);
  }
}

}  // namespace detail

/// Evaluates objective, threshold and bound columns over a parameter grid.
/// Grid points run independently (optionally in parallel); a failing point
/// records its error in-row and the sweep continues.
inline SweepResult run_sweep(const Scenario& sc, const SweepDecl& decl,
                             const SolverOptions& base_opts = {}, int jobs = 1) {
  SweepResult result;
  result.parameter = decl.parameter;
  result.rows.resize(decl.grid.size());

  auto eval_point = [&](std::size_t idx) {
    SweepRow& row = result.rows[idx];
    row.value = decl.grid[idx];
    try {
      if (decl.parameter == "L") {
        const FlowSolution flow = solve_traffic(sc.net, TrafficMode::Equality);
        detail::fill_class_columns(sc.net, flow, row.value, row);
        SolverOptions opts = base_opts;
        opts.seed = base_opts.seed + idx;
        row.comms_cost = comms_cost(sc.net);
        row.min_cost = min_cost(sc.net, opts).first.total;
      } else {
        const NetworkSpec net =
            detail::apply_parameter(sc, decl.parameter, row.value, decl.scale_beta);
        const FlowSolution flow = solve_traffic(net, TrafficMode::Equality);
        detail::fill_class_columns(net, flow, 0.0, row);
        SolverOptions opts = base_opts;
        opts.seed = base_opts.seed + idx;
        row.comms_cost = comms_cost(net);
        row.min_cost = min_cost(net, opts).first.total;
      }
    } catch (const std::exception& e) {
      row.status = e.what();
    }
  };

  if (jobs <= 1 || decl.grid.size() <= 1) {
    for (std::size_t i = 0; i < decl.grid.size(); ++i) eval_point(i);
  } else {
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(jobs, decl.grid.size());
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < decl.grid.size(); i += workers) eval_point(i);
      });
    for (auto& t : pool) t.join();
  }
  return result;
}

}  // namespace fcnet
