#include <doctest.h>

#include <cmath>

#include "tonsim/error.hpp"
#include "tonsim/simulation.hpp"

using namespace tonsim;

namespace {

TonConfig tiny() {
  TonConfig c;
  c.n_nodes = 50;
  c.density = 0.5;
  c.sim_duration = 500.0;
  c.injection_rate = 0.5;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("event queue orders by time then insertion") {
  EventQueue q;
  q.push(2.0, EventKind::Inject, 1);
  q.push(1.0, EventKind::Inject, 2);
  q.push(2.0, EventKind::Inject, 3);
  q.push(1.0, EventKind::Inject, 4);
  std::vector<std::uint64_t> order;
  while (!q.empty()) order.push_back(q.pop().target);
  CHECK(order == std::vector<std::uint64_t>{2, 4, 1, 3});
}

TEST_CASE("zero rate injects nothing") {
  TonConfig c = tiny();
  c.injection_rate = 0.0;
  const RunStats s = run_simulation(c);
  CHECK(s.injected == 0);
  CHECK(s.committed == 0);
  CHECK(s.aborted == 0);
  CHECK(s.end_time == c.sim_duration);
}

TEST_CASE("empty graph aborts everything after the first hop") {
  TonConfig c = tiny();
  c.density = 0.0;
  c.injection_rate = 2.0;
  const RunStats s = run_simulation(c);
  CHECK(s.injected > 0);
  CHECK(s.committed == 0);
  CHECK(s.aborted_host_died == 0);
  CHECK(s.aborted_all_neighbors_disabled + s.in_flight == s.injected);
  // Structurally dead from the start.
  REQUIRE(s.choke_time.has_value());
  CHECK(*s.choke_time == 0.0);
}

TEST_CASE("empty graph chokes at the first full window") {
  TonConfig c = tiny();
  c.density = 0.0;
  c.injection_rate = 5.0;
  RunOptions opt;
  opt.choke.window = 100;
  Simulator sim(c, opt);
  const RunStats s = sim.finish();
  REQUIRE(s.window_records.size() >= 1);
  CHECK(s.window_records.front().commit_fraction == 0.0);
}

TEST_CASE("length one transactions commit on an empty graph") {
  TonConfig c = tiny();
  c.density = 0.0;
  c.txn_length = 1;
  c.capacity = 1e9;
  const RunStats s = run_simulation(c);
  CHECK(s.aborted == 0);
  CHECK(s.committed + s.in_flight == s.injected);
  CHECK_FALSE(s.choke_time.has_value());
}

TEST_CASE("unreachable capacity means no aborts") {
  TonConfig c = tiny();
  c.capacity = 1e9;
  c.injection_rate = 0.2;
  const RunStats s = run_simulation(c);
  CHECK(s.injected > 50);
  CHECK(s.aborted == 0);
  CHECK(s.committed == s.injected - s.in_flight);
  CHECK(s.nodes_disabled_overload == 0);
  // Fewer than L + 1 transactions can be unfinished at S with inter-arrival ~5.
  CHECK(s.in_flight <= 5);
}

TEST_CASE("hand-traceable two node run") {
  // Two connected nodes, L=2: a transaction alternates between them and
  // commits 2 time units after injection.
  TonConfig c;
  c.n_nodes = 2;
  c.density = 1.0;
  c.txn_length = 2;
  c.capacity = 1e9;
  c.sim_duration = 100.0;
  c.injection_rate = 0.05;
  c.seed = 3;
  Simulator sim(c);
  sim.run();
  for (const auto& t : sim.transactions()) {
    if (t.status != TxnStatus::Committed) continue;
    CHECK(t.resolved_at - t.injected_at == doctest::Approx(2.0));
    CHECK(t.completed == 2);
    CHECK(t.current_node != t.previous_node);
  }
}

TEST_CASE("overload kills and aborts hosted transactions") {
  TonConfig c = tiny();
  c.capacity = 3.0;
  c.injection_rate = 3.0;
  const RunStats s = run_simulation(c);
  CHECK(s.nodes_disabled_overload > 0);
  CHECK(s.aborted_host_died > 0);
}

TEST_CASE("schedule_faults") {
  SUBCASE("disabled") {
    TonConfig c = tiny();
    Rng rng(1, Stream::Faults);
    CHECK(schedule_faults(c, rng).empty());
  }
  SUBCASE("one exponential time per node") {
    TonConfig c;
    c.n_nodes = 1000;
    c.fault_mean_delay = 100.0;
    Rng rng(2024, Stream::Faults);
    const auto faults = schedule_faults(c, rng);
    REQUIRE(faults.size() == 1000);
    double sum = 0;
    for (NodeId n = 0; n < 1000; ++n) {
      CHECK(faults[n].node == n);
      CHECK(faults[n].time > 0.0);
      sum += faults[n].time;
    }
    CHECK(sum / 1000 >= 90.0);
    CHECK(sum / 1000 <= 110.0);
  }
}

TEST_CASE("faults disable nodes and are recorded by cause") {
  TonConfig c = tiny();
  c.fault_mean_delay = 100.0;
  c.capacity = 1e9;
  const RunStats s = run_simulation(c);
  CHECK(s.nodes_disabled_fault > 40);
  CHECK(s.nodes_disabled_overload == 0);
  REQUIRE(s.choke_time.has_value());
  REQUIRE(s.fault_fraction_at_choke.has_value());
  CHECK(*s.fault_fraction_at_choke == *s.disabled_fraction_at_choke);
}

TEST_CASE("fault on an overloaded node keeps its cause") {
  // Overload dominates: every node dies from overload quickly, later faults are no-ops.
  TonConfig c = tiny();
  c.capacity = 1.5;
  c.injection_rate = 20.0;
  c.fault_mean_delay = 400.0;
  Simulator sim(c);
  sim.run();
  const RunStats s = sim.finish();
  CHECK(s.nodes_disabled_overload + s.nodes_disabled_fault <= c.n_nodes);
  std::size_t overloaded = 0;
  for (NodeId n = 0; n < c.n_nodes; ++n) {
    if (sim.network().state(n) == NodeState::DisabledOverload) ++overloaded;
  }
  CHECK(overloaded == s.nodes_disabled_overload);
}

TEST_CASE("determinism and seed sensitivity") {
  const TonConfig c = tiny();
  CHECK(run_simulation(c) == run_simulation(c));
  TonConfig other = c;
  other.seed = 18;
  CHECK_FALSE(run_simulation(c) == run_simulation(other));
}

TEST_CASE("arrival stream does not depend on network dynamics") {
  TonConfig a = tiny();
  TonConfig b = a;
  b.capacity = 1.1;
  CHECK(run_simulation(a).injected == run_simulation(b).injected);
  CHECK(run_simulation(a).injected == count_arrivals(a));
}

TEST_CASE("stop rules") {
  TonConfig c = tiny();
  c.capacity = 2.0;
  c.injection_rate = 5.0;
  RunOptions opt;
  opt.stop = StopRule::OnAbortCount;
  opt.abort_budget = 3;
  const RunStats s = run_simulation(c, opt);
  CHECK(s.stopped_early);
  CHECK(s.aborted >= 3);
  CHECK(s.end_time < c.sim_duration);

  opt.stop = StopRule::OnChoke;
  opt.choke.window = 50;
  const RunStats t = run_simulation(c, opt);
  CHECK(t.stopped_early);
  CHECK(t.choke_time.has_value());
}

TEST_CASE("invalid configs are rejected up front") {
  TonConfig c = tiny();
  c.alpha = -1.0;
  CHECK_THROWS_AS(run_simulation(c), InvalidParameter);
}
