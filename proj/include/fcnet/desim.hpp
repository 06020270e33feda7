#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "fcnet/errors.hpp"
#include "fcnet/flownet.hpp"
#include "fcnet/network.hpp"

namespace fcnet {

/// Deterministic random stream: canonical 53-bit uniforms drawn from a fixed
/// 64-bit generator, so runs replay bit-identically across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed ? seed : 0x853c49e6748fea9bULL) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Index drawn proportionally to nonnegative weights summing to `total`.
  std::size_t pick(const std::vector<double>& weights, double total) {
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

 private:
  std::uint64_t next() {  // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

struct SimConfig {
  NetworkSpec net;
  /// Probability that a compute completion at (node, class) is forwarded to
  /// the transmit queue rather than absorbed. Empty: use the per-class
  /// surjectivity (the fully compressed operating point).
  std::vector<double> forward_prob;
  std::uint64_t horizon_departures = 1000000;  // stop after this many departures
  double horizon_time = 0.0;                   // alternative stop, simulated seconds
  double warmup_fraction = 0.2;
  std::uint64_t seed = 1;
  double slot_duration = 1.0;
  std::uint64_t max_events = 400000000;
  /// When set, record a time-weighted histogram of this node's transmit-queue
  /// state, keyed by the per-class packet counts.
  std::size_t histogram_node = static_cast<std::size_t>(-1);
};

struct NodeClassStats {
  double L = 0.0, m = 0.0, n = 0.0;  // time-average occupancies
  double throughput = 0.0;           // visits begun per second, post-warmup
  double sojourn_mean = 0.0;         // seconds per completed visit
  double little_gap = 0.0;           // |L - throughput * sojourn_mean|
  std::uint64_t entries = 0, exits = 0, terminated = 0, departed = 0, routed = 0;
};

struct SimStats {
  std::string network_name;
  std::size_t nodes = 0, classes = 0;
  double sim_time = 0.0, warmup_time = 0.0, measured_time = 0.0;
  std::uint64_t total_departures = 0, total_events = 0, total_forwarded = 0;
  std::vector<NodeClassStats> per_pair;  // node-major
  std::vector<std::uint64_t> slot_forwarded;  // per-slot forwards, whole run
  std::vector<std::uint64_t> class_external, class_departed, class_terminated,
      class_converted_in, class_converted_out, class_in_flight;
  /// Time share per transmit-queue state of the histogram node, keyed by
  /// per-class counts (empty unless requested).
  std::vector<std::pair<std::vector<std::uint32_t>, double>> occupancy_histogram;
};

namespace detail {

/// Offered load for per-pair forwarding probabilities: the linear fixed point
/// lambda = beta + routed(diag(p) lambda).
inline std::vector<double> offered_load(const NetworkSpec& net,
                                        const std::vector<double>& fwd) {
  const std::size_t dim = net.pairs();
  const Mat R = traffic_matrix(net, /*apply_surjectivity=*/false);
  Mat M = Mat::identity(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) M(i, j) -= R(i, j) * fwd[j];
  return lu_solve(std::move(M), net.beta);
}

}  // namespace detail

/// Event-driven simulation of the tandem compute -> transmit network with
/// Markov routing and class conversion. Poisson external arrivals, exponential
/// services, FIFO single-server queues. A compute completion is forwarded
/// with the configured probability and silently absorbed otherwise.
inline SimStats run_simulation(const SimConfig& cfg) {
  const NetworkSpec& net = cfg.net;
  const std::size_t N = net.nodes, C = net.classes, dim = net.pairs();
  {
    const auto violations = validate_network(net);
    if (!violations.empty())
      throw validation_error("simulation: invalid network: " + violations.front());
  }
  if (cfg.horizon_departures == 0 && !(cfg.horizon_time > 0.0))
    throw validation_error("simulation: no horizon configured");
  if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction >= 1.0)
    throw validation_error("simulation: warmup fraction outside [0, 1)");

  std::vector<double> fwd = cfg.forward_prob;
  if (fwd.empty()) {
    fwd.resize(dim);
    for (std::size_t v = 0; v < N; ++v)
      for (std::size_t c = 0; c < C; ++c) fwd[net.idx(v, c)] = net.gamma_surj[c];
  }
  if (fwd.size() != dim) throw validation_error("simulation: forward_prob shape mismatch");
  for (double p : fwd)
    if (p < 0.0 || p > 1.0 + 1e-12)
      throw validation_error("simulation: forward probability outside [0, 1]");

  // stability: total intensity below 1 at every station
  const auto lambda = detail::offered_load(net, fwd);
  for (std::size_t v = 0; v < N; ++v) {
    double sigma = 0.0, rho = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t i = net.idx(v, c);
      if (std::isfinite(net.chi[i])) sigma += lambda[i] / net.chi[i];
      rho += lambda[i] * fwd[i] / net.mu[i];
    }
    if (!(sigma < 1.0) || !(rho < 1.0))
      throw infeasible_error("simulation: station " + std::to_string(v) + " is unstable");
  }

  struct Packet {
    std::uint32_t cls;
    double entry;
    bool counted;
  };
  struct Station {
    std::deque<Packet> q;
    bool busy = false;
  };
  enum class Ev : std::uint8_t { Arrival, ComputeDone, CommDone };
  struct Event {
    double t;
    std::uint64_t seq;
    Ev kind;
    std::uint32_t node, cls;
    bool operator>(const Event& o) const {
      return t != o.t ? t > o.t : seq > o.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap;
  std::uint64_t seq = 0;
  RngStream rng(cfg.seed);
  auto push = [&](double t, Ev kind, std::size_t v, std::size_t c) {
    heap.push({t, seq++, kind, static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(c)});
  };

  std::vector<Station> compute(N), comm(N);
  std::vector<std::int64_t> m_count(dim, 0), n_count(dim, 0);
  std::vector<double> int_m(dim, 0.0), int_n(dim, 0.0);
  std::vector<std::uint64_t> entries(dim, 0), exits(dim, 0), terminated(dim, 0),
      departed(dim, 0), routed(dim, 0);
  std::vector<double> sojourn_sum(dim, 0.0);
  std::vector<std::uint64_t> sojourn_n(dim, 0);
  std::vector<std::uint64_t> cls_ext(C, 0), cls_dep(C, 0), cls_term(C, 0), cls_cin(C, 0),
      cls_cout(C, 0);
  std::vector<std::uint64_t> slots;
  std::map<std::vector<std::uint32_t>, double> histogram;
  const bool track_histogram = cfg.histogram_node < N;
  std::vector<std::uint32_t> histo_state(track_histogram ? C : 0, 0);

  double now = 0.0, last = 0.0;
  bool measuring = cfg.warmup_fraction == 0.0;
  double warmup_time = 0.0;
  std::uint64_t departures = 0, forwarded = 0, events = 0;
  const std::uint64_t warmup_departures =
      static_cast<std::uint64_t>(cfg.warmup_fraction * static_cast<double>(cfg.horizon_departures));
  const double warmup_clock = cfg.warmup_fraction * cfg.horizon_time;

  auto start_compute = [&](std::size_t v) {
    auto& st = compute[v];
    if (st.busy || st.q.empty()) return;
    st.busy = true;
    const std::size_t c = st.q.front().cls;
    const double chi = net.chi[net.idx(v, c)];
    const double dt = std::isfinite(chi) ? rng.exponential(chi) : 0.0;
    push(now + dt, Ev::ComputeDone, v, c);
  };
  auto start_comm = [&](std::size_t v) {
    auto& st = comm[v];
    if (st.busy || st.q.empty()) return;
    st.busy = true;
    const std::size_t c = st.q.front().cls;
    push(now + rng.exponential(net.mu[net.idx(v, c)]), Ev::CommDone, v, c);
  };
  auto advance_time = [&](double t) {
    if (measuring) {
      const double dt = t - last;
      if (dt > 0.0) {
        for (std::size_t i = 0; i < dim; ++i) {
          if (m_count[i]) int_m[i] += dt * static_cast<double>(m_count[i]);
          if (n_count[i]) int_n[i] += dt * static_cast<double>(n_count[i]);
        }
        if (track_histogram) {
          for (std::size_t c = 0; c < C; ++c)
            histo_state[c] =
                static_cast<std::uint32_t>(n_count[net.idx(cfg.histogram_node, c)]);
          histogram[histo_state] += dt;
        }
      }
    }
    last = t;
    now = t;
  };
  auto begin_measuring = [&]() {
    if (measuring) return;
    measuring = true;
    warmup_time = now;
    last = now;
    std::fill(entries.begin(), entries.end(), 0);
    std::fill(exits.begin(), exits.end(), 0);
    std::fill(terminated.begin(), terminated.end(), 0);
    std::fill(departed.begin(), departed.end(), 0);
    std::fill(routed.begin(), routed.end(), 0);
  };
  auto enter_node = [&](std::size_t v, std::size_t c) {
    const std::size_t i = net.idx(v, c);
    ++m_count[i];
    if (measuring) ++entries[i];
    compute[v].q.push_back({static_cast<std::uint32_t>(c), now, measuring});
    start_compute(v);
  };
  auto leave_node = [&](std::size_t v, std::size_t c, const Packet& p) {
    const std::size_t i = net.idx(v, c);
    if (measuring) ++exits[i];
    if (p.counted && measuring) {
      sojourn_sum[i] += now - p.entry;
      ++sojourn_n[i];
    }
  };

  // prime external arrivals, in fixed (node, class) order
  for (std::size_t v = 0; v < N; ++v)
    for (std::size_t c = 0; c < C; ++c)
      if (net.beta[net.idx(v, c)] > 0.0)
        push(rng.exponential(net.beta[net.idx(v, c)]), Ev::Arrival, v, c);

  std::vector<double> route_weights(N * C, 0.0);
  const bool by_departures = cfg.horizon_departures > 0;

  while (!heap.empty()) {
    if (++events > cfg.max_events)
      throw infeasible_error("simulation: event budget exhausted");
    const Event ev = heap.top();
    heap.pop();
    if (!by_departures && ev.t >= cfg.horizon_time) {
      advance_time(cfg.horizon_time);
      break;
    }
    advance_time(ev.t);
    if (!measuring && !by_departures && now >= warmup_clock) begin_measuring();

    const std::size_t v = ev.node, c = ev.cls, i = net.idx(v, c);
    switch (ev.kind) {
      case Ev::Arrival: {
        ++cls_ext[c];
        enter_node(v, c);
        push(now + rng.exponential(net.beta[i]), Ev::Arrival, v, c);
        break;
      }
      case Ev::ComputeDone: {
        auto& st = compute[v];
        const Packet p = st.q.front();
        st.q.pop_front();
        st.busy = false;
        --m_count[i];
        if (rng.uniform() < fwd[i]) {
          ++forwarded;
          const std::size_t slot =
              static_cast<std::size_t>(now / cfg.slot_duration);
          if (slots.size() <= slot) slots.resize(slot + 1, 0);
          ++slots[slot];
          ++n_count[i];
          comm[v].q.push_back(p);
          start_comm(v);
        } else {
          ++terminated[i];
          ++cls_term[c];
          leave_node(v, c, p);
        }
        start_compute(v);
        break;
      }
      case Ev::CommDone: {
        auto& st = comm[v];
        const Packet p = st.q.front();
        st.q.pop_front();
        st.busy = false;
        --n_count[i];
        // departure vs routed continuation
        const double u = rng.uniform();
        if (u < net.routing.depart(c, v)) {
          ++departed[i];
          ++cls_dep[c];
          ++departures;
          leave_node(v, c, p);
          if (by_departures && !measuring && departures >= warmup_departures)
            begin_measuring();
          if (by_departures && departures >= cfg.horizon_departures) {
            start_comm(v);
            goto done;
          }
        } else {
          double total = 0.0;
          for (std::size_t w = 0; w < N; ++w)
            for (std::size_t c2 = 0; c2 < C; ++c2) {
              route_weights[w * C + c2] = net.routing.move(c, v, w, c2);
              total += route_weights[w * C + c2];
            }
          const std::size_t choice = rng.pick(route_weights, total);
          const std::size_t w = choice / C, c2 = choice % C;
          ++routed[i];
          if (c2 != c) {
            ++cls_cout[c];
            ++cls_cin[c2];
          }
          leave_node(v, c, p);
          enter_node(w, c2);
        }
        start_comm(v);
        break;
      }
    }
  }
done:

  SimStats out;
  out.network_name = net.name;
  out.nodes = N;
  out.classes = C;
  out.sim_time = now;
  out.warmup_time = warmup_time;
  out.measured_time = measuring ? now - warmup_time : 0.0;
  out.total_departures = departures;
  out.total_events = events;
  out.total_forwarded = forwarded;
  out.slot_forwarded = std::move(slots);
  out.per_pair.resize(dim);
  const double T = out.measured_time;
  for (std::size_t i = 0; i < dim; ++i) {
    NodeClassStats& s = out.per_pair[i];
    s.entries = entries[i];
    s.exits = exits[i];
    s.terminated = terminated[i];
    s.departed = departed[i];
    s.routed = routed[i];
    if (T > 0.0) {
      s.m = int_m[i] / T;
      s.n = int_n[i] / T;
      s.L = s.m + s.n;
      s.throughput = static_cast<double>(entries[i]) / T;
    }
    if (sojourn_n[i] > 0)
      s.sojourn_mean = sojourn_sum[i] / static_cast<double>(sojourn_n[i]);
    s.little_gap = std::abs(s.L - s.throughput * s.sojourn_mean);
  }
  out.class_external = std::move(cls_ext);
  out.class_departed = std::move(cls_dep);
  out.class_terminated = std::move(cls_term);
  out.class_converted_in = std::move(cls_cin);
  out.class_converted_out = std::move(cls_cout);
  out.class_in_flight.assign(C, 0);
  for (std::size_t v = 0; v < N; ++v) {
    for (const auto& p : compute[v].q) ++out.class_in_flight[p.cls];
    for (const auto& p : comm[v].q) ++out.class_in_flight[p.cls];
  }
  if (track_histogram && T > 0.0) {
    out.occupancy_histogram.reserve(histogram.size());
    for (const auto& [state, time] : histogram)
      out.occupancy_histogram.emplace_back(state, time / T);
  }
  return out;
}

struct CheckRow {
  std::size_t node = 0, cls = 0;
  std::string quantity;
  double simulated = 0.0, expected = 0.0, rel_error = 0.0;
  bool pass = true;
};

struct CheckReport {
  std::vector<CheckRow> rows;
  bool pass = true;
};

/// Verifies L = (entry rate) * (mean sojourn) per (node, class) on the
/// measured statistics. Pairs that saw no traffic pass vacuously.
inline CheckReport empirical_little_check(const SimStats& stats, double tol) {
  CheckReport rep;
  for (std::size_t v = 0; v < stats.nodes; ++v)
    for (std::size_t c = 0; c < stats.classes; ++c) {
      const auto& s = stats.per_pair[v * stats.classes + c];
      CheckRow row{v, c, "littles_law", s.L, s.throughput * s.sojourn_mean, 0.0, true};
      if (s.entries > 0 && s.L > 0.0) {
        row.rel_error = std::abs(row.simulated - row.expected) / s.L;
        row.pass = row.rel_error <= tol;
      }
      rep.pass = rep.pass && row.pass;
      rep.rows.push_back(row);
    }
  return rep;
}

/// Compares measured arrival rates, occupancies and sojourns against the
/// product-form predictions for the simulated tandem stations at the supplied
/// flow point. The single-queue occupancy chain (L = lambda/(mu-gamma) split
/// by the compression ratio) is reported alongside as an informational gap,
/// not as a pass/fail quantity.
inline CheckReport compare_to_analytic(const SimStats& stats, const FlowSolution& flow,
                                       const NetworkSpec& net, double tol) {
  if (stats.nodes != net.nodes || stats.classes != net.classes ||
      flow.lambda.size() != net.pairs())
    throw validation_error("comparison: shape mismatch between run and network");
  if (!stats.network_name.empty() && !net.name.empty() && stats.network_name != net.name)
    throw validation_error("comparison: statistics come from network '" +
                           stats.network_name + "', not '" + net.name + "'");

  CheckReport rep;
  const std::size_t N = net.nodes, C = net.classes;
  for (std::size_t v = 0; v < N; ++v) {
    double sigma_v = 0.0, rho_v = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t i = net.idx(v, c);
      if (std::isfinite(net.chi[i])) sigma_v += flow.lambda[i] / net.chi[i];
      rho_v += flow.gamma[i] / net.mu[i];
    }
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t i = net.idx(v, c);
      const auto& s = stats.per_pair[i];
      const double lam = flow.lambda[i], gam = flow.gamma[i];
      const double sigma_c = std::isfinite(net.chi[i]) ? lam / net.chi[i] : 0.0;
      const double rho_c = gam / net.mu[i];
      const double m_pred = sigma_v < 1.0 ? sigma_c / (1.0 - sigma_v) : 0.0;
      const double n_pred = rho_v < 1.0 ? rho_c / (1.0 - rho_v) : 0.0;
      const double w_m = lam > 0.0 && std::isfinite(net.chi[i])
                             ? (1.0 / net.chi[i]) / (1.0 - sigma_v)
                             : 0.0;
      const double w_n = (1.0 / net.mu[i]) / (1.0 - rho_v);
      const double p_fwd = lam > 0.0 ? gam / lam : 0.0;
      const double w_pred = lam > 0.0 ? w_m + p_fwd * w_n : 0.0;

      auto add = [&](const char* what, double sim, double pred) {
        CheckRow row{v, c, what, sim, pred, 0.0, true};
        if (pred > 1e-12) {
          row.rel_error = std::abs(sim - pred) / pred;
          row.pass = row.rel_error <= tol;
        } else {
          row.pass = std::abs(sim) <= tol;
          row.rel_error = std::abs(sim);
        }
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
      };
      add("lambda", s.throughput, lam);
      add("L", s.L, m_pred + n_pred);
      add("W", s.sojourn_mean, w_pred);

      // informational: occupancy ladder of the single-queue reading
      CheckRow info{v, c, "L_single_queue_gap", s.L,
                    gam < net.mu[i] && lam > 0.0 ? lam / (net.mu[i] - gam) : 0.0, 0.0,
                    true};
      if (info.expected > 0.0)
        info.rel_error = std::abs(info.simulated - info.expected) / info.expected;
      rep.rows.push_back(info);
    }
  }
  return rep;
}

}  // namespace fcnet
