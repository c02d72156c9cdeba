#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tonsim/choke.hpp"
#include "tonsim/config.hpp"
#include "tonsim/error.hpp"
#include "tonsim/network.hpp"

using namespace tonsim;

namespace {

TonConfig small(std::uint32_t n, double d) {
  TonConfig c;
  c.n_nodes = n;
  c.density = d;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(validate(TonConfig{}));
  CHECK_NOTHROW(validate(desk_config()));
  CHECK(desk_config().n_nodes == 200);
  CHECK(desk_config().sim_duration == 3650.0);

  auto bad = [](auto mutate) {
    TonConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(validate(bad([](TonConfig& c) { c.n_nodes = 1; })), InvalidParameter);
  CHECK_THROWS_AS(validate(bad([](TonConfig& c) { c.density = 1.5; })), InvalidParameter);
  CHECK_THROWS_AS(validate(bad([](TonConfig& c) { c.capacity = 0; })), InvalidParameter);
  CHECK_THROWS_AS(validate(bad([](TonConfig& c) { c.txn_length = 0; })), InvalidParameter);
  CHECK_THROWS_AS(validate(bad([](TonConfig& c) { c.alpha = 0; })), InvalidParameter);
  CHECK_THROWS_AS(validate(bad([](TonConfig& c) { c.psi0 = -1; })), InvalidParameter);
  CHECK_THROWS_AS(validate(bad([](TonConfig& c) { c.decay_time = 0; })), InvalidParameter);
  CHECK_THROWS_AS(validate(bad([](TonConfig& c) { c.fault_mean_delay = 0.0; })), InvalidParameter);
  CHECK_NOTHROW(validate(bad([](TonConfig& c) { c.density = 0; })));

  try {
    validate(bad([](TonConfig& c) { c.density = 1.5; }));
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("density") != std::string::npos);
  }
}

TEST_CASE("generate_network extremes") {
  Rng rng(1);
  const Network full = generate_network(small(5, 1.0), rng);
  CHECK(full.edge_count() == 10);
  for (NodeId n = 0; n < 5; ++n) CHECK(full.neighbors(n).size() == 4);

  const Network empty = generate_network(small(5, 0.0), rng);
  CHECK(empty.edge_count() == 0);
  CHECK(empty.alive_count() == 5);
  CHECK(empty.routable_count() == 0);
}

TEST_CASE("generate_network is simple and symmetric") {
  Rng rng(77);
  const Network net = generate_network(small(120, 0.3), rng);
  for (NodeId a = 0; a < net.size(); ++a) {
    for (NodeId b : net.neighbors(a)) {
      REQUIRE(a != b);
      const auto nb = net.neighbors(b);
      REQUIRE(std::find(nb.begin(), nb.end(), a) != nb.end());
    }
    auto sorted = std::vector<NodeId>(net.neighbors(a).begin(), net.neighbors(a).end());
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  }
}

TEST_CASE("edge count of G(1000, 0.5) over 100 seeds") {
  const double pairs = 1000.0 * 999.0 / 2.0;
  double total = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(derive_run_seed(3, s), Stream::Graph);
    total += static_cast<double>(generate_network(small(1000, 0.5), rng).edge_count());
  }
  const double mean = total / 100.0;
  // Binomial(pairs, 0.5) mean over 100 draws; 3 sigma of the sample mean.
  const double sigma = std::sqrt(pairs * 0.25 / 100.0);
  CHECK(std::abs(mean - 249750.0) < 3 * sigma);
}

TEST_CASE("disable bookkeeping") {
  // Path 0 - 1 - 2.
  Network net({{1}, {0, 2}, {1}});
  CHECK(net.routable_count() == 3);
  CHECK(net.disable(1, DisableCause::Overload));
  CHECK(net.routable_count() == 0);
  CHECK(net.alive_count() == 2);
  CHECK(net.alive_neighbor_count(0) == 0);
  CHECK_FALSE(net.disable(1, DisableCause::Fault));
  CHECK(net.state(1) == NodeState::DisabledOverload);
  CHECK(net.fault_count() == 0);
  CHECK(net.disable(0, DisableCause::Fault));
  CHECK(net.fault_count() == 1);
}

TEST_CASE("route_next") {
  SUBCASE("single alive neighbour") {
    Network net({{1, 2}, {0}, {0}});
    net.disable(2, DisableCause::Fault);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) CHECK(route_next(net, 0, rng) == NodeId{1});
  }
  SUBCASE("no alive neighbour") {
    Network net({{1, 2}, {0}, {0}});
    net.disable(1, DisableCause::Fault);
    net.disable(2, DisableCause::Overload);
    Rng rng(4);
    CHECK_FALSE(route_next(net, 0, rng).has_value());
  }
  SUBCASE("star hub spreads evenly over four leaves") {
    Network net({{1, 2, 3, 4}, {0}, {0}, {0}, {0}});
    Rng rng(99, Stream::Routing);
    std::array<int, 5> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[*route_next(net, 0, rng)];
    CHECK(counts[0] == 0);
    for (int leaf = 1; leaf <= 4; ++leaf) CHECK(std::abs(counts[leaf] / double(n) - 0.25) < 0.01);
  }
  SUBCASE("sparse alive neighbourhood takes the scan path") {
    std::vector<std::vector<NodeId>> adj(21);
    for (NodeId i = 1; i <= 20; ++i) {
      adj[0].push_back(i);
      adj[i].push_back(0);
    }
    Network net(adj);
    for (NodeId i = 1; i <= 18; ++i) net.disable(i, DisableCause::Fault);
    Rng rng(5);
    std::array<int, 21> counts{};
    for (int i = 0; i < 20000; ++i) ++counts[*route_next(net, 0, rng)];
    CHECK(counts[19] + counts[20] == 20000);
    CHECK(std::abs(counts[19] - 10000) < 3 * std::sqrt(5000.0));
  }
}

TEST_CASE("detect_choke") {
  const ChokeCriterion crit;
  const std::vector<double> healthy(5, 1.0);
  CHECK_FALSE(detect_choke(healthy, crit).has_value());
  const std::vector<double> falling{0.9, 0.5, 0.0};
  CHECK(detect_choke(falling, crit) == std::size_t{2});
  const std::vector<double> at_floor{0.9, 0.01};
  CHECK(detect_choke(at_floor, crit) == std::size_t{1});
  CHECK_THROWS_AS(validate(ChokeCriterion{0, 0.01}), InvalidParameter);
  CHECK_THROWS_AS(validate(ChokeCriterion{10, 1.0}), InvalidParameter);
}
