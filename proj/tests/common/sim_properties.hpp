// Randomized checks of the simulator invariants. Shared by the unit tests and
// the acceptance binary so both exercise exactly the same cases.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "tonsim/cost.hpp"
#include "tonsim/rng.hpp"
#include "tonsim/simulation.hpp"

namespace tonsim::testing {

struct PropertyReport {
  std::size_t cases = 0;
  std::map<std::string, std::size_t> failures;

  void fail(const std::string& what) { ++failures[what]; }
  std::size_t failure_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : failures) n += v;
    return n;
  }
};

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline TonConfig random_config(Rng& rng) {
  TonConfig c;
  c.n_nodes = 2 + static_cast<std::uint32_t>(rng.uniform_index(39));
  c.density = rng.bernoulli(0.1) ? (rng.bernoulli(0.5) ? 0.0 : 1.0) : rng.uniform01();
  c.capacity = 0.5 + 20.0 * rng.uniform01();
  c.txn_length = 1 + static_cast<std::uint32_t>(rng.uniform_index(12));
  c.sim_duration = 20.0 + 380.0 * rng.uniform01();
  c.decay_time = 1.0 + 59.0 * rng.uniform01();
  c.psi0 = 0.1 + 2.9 * rng.uniform01();
  c.alpha = 0.5 + 1.1 * rng.uniform01();
  c.injection_rate = rng.bernoulli(0.05) ? 0.0 : 4.0 * rng.uniform01();
  if (rng.bernoulli(0.5)) c.fault_mean_delay = 10.0 + 490.0 * rng.uniform01();
  c.seed = rng.next_u64();
  return c;
}

/// Steps one run event by event and checks the state invariants between events.
inline void check_run(const TonConfig& config, PropertyReport& report) {
  Simulator sim(config);
  bool routing_ok = true;
  bool host_alive_ok = true;
  sim.set_hop_observer([&](const Transaction&, NodeId from, NodeId to) {
    if (from == to) routing_ok = false;
    if (!sim.network().alive(to)) host_alive_ok = false;
  });

  std::vector<NodeState> last(config.n_nodes, NodeState::Alive);
  bool capacity_ok = true;
  bool monotone_ok = true;
  double last_time = 0.0;
  bool clock_ok = true;
  while (sim.step()) {
    if (sim.now() < last_time) clock_ok = false;
    last_time = sim.now();
    const Network& net = sim.network();
    for (NodeId n = 0; n < net.size(); ++n) {
      if (net.alive(n) && !(sim.ledger().xi(n) < config.capacity)) capacity_ok = false;
      if (last[n] != NodeState::Alive && net.state(n) != last[n]) monotone_ok = false;
      last[n] = net.state(n);
    }
  }
  if (!routing_ok) report.fail("routing exclusion");
  if (!host_alive_ok) report.fail("hop to disabled host");
  if (!capacity_ok) report.fail("capacity safety");
  if (!monotone_ok) report.fail("monotone death");
  if (!clock_ok) report.fail("event order");

  for (const Transaction& t : sim.transactions()) {
    if (t.status == TxnStatus::Committed && t.completed != config.txn_length) {
      report.fail("commit length");
    }
    if (t.status == TxnStatus::Aborted && t.completed >= config.txn_length) {
      report.fail("commit length");
    }
  }

  const RunStats stats = sim.finish();
  if (stats.injected != stats.committed + stats.aborted + stats.in_flight) report.fail("conservation");
  if (stats.aborted != stats.aborted_all_neighbors_disabled + stats.aborted_host_died) {
    report.fail("abort reasons");
  }
  if (stats.injected != count_arrivals(config)) report.fail("arrival count");
  if (!(stats == run_simulation(config))) report.fail("determinism");
}

/// `cases` random configurations plus the same number of pure cost checks.
inline PropertyReport run_property_suite(std::size_t cases, std::uint64_t seed) {
  PropertyReport report;
  Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    ++report.cases;

    // Geometric identity.
    const double psi0 = 0.01 + 10.0 * rng.uniform01();
    double alpha = 0.2 + 2.0 * rng.uniform01();
    if (alpha == 1.0) alpha = 1.5;
    const auto L = static_cast<std::uint32_t>(1 + rng.uniform_index(20));
    double sum = 0.0;
    for (std::uint32_t i = 1; i <= L; ++i) sum += subtxn_cost(i, L, psi0, alpha);
    if (rel_diff(sum, total_txn_cost(psi0, alpha, L)) > 1e-12) report.fail("geometric identity");

    // Decay composition.
    const double xi = 20.0 * rng.uniform01();
    const double h = 0.5 + 100.0 * rng.uniform01();
    const double t1 = 50.0 * rng.uniform01();
    const double t2 = 50.0 * rng.uniform01();
    CostLedger split(1, h);
    CostLedger whole(1, h);
    split.set(0, xi, 0.0);
    whole.set(0, xi, 0.0);
    split.apply_decay(0, t1);
    const double a = split.apply_decay(0, t1 + t2);
    const double b = whole.apply_decay(0, t1 + t2);
    if (rel_diff(a, b) > 1e-12) report.fail("decay composition");

    check_run(random_config(rng), report);
  }
  return report;
}

}  // namespace tonsim::testing
