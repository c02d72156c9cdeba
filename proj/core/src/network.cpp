#include "tonsim/network.hpp"

#include <numeric>

#include "tonsim/error.hpp"

namespace tonsim {

Network::Network(std::vector<std::vector<NodeId>> adjacency)
    : adjacency_(std::move(adjacency)),
      states_(adjacency_.size(), NodeState::Alive),
      alive_(adjacency_.size()),
      alive_pos_(adjacency_.size()),
      alive_degree_(adjacency_.size()) {
  std::iota(alive_.begin(), alive_.end(), NodeId{0});
  std::iota(alive_pos_.begin(), alive_pos_.end(), 0U);
  for (std::size_t n = 0; n < adjacency_.size(); ++n) {
    alive_degree_[n] = static_cast<std::uint32_t>(adjacency_[n].size());
    if (alive_degree_[n] > 0) ++routable_;
  }
}

std::size_t Network::edge_count() const {
  std::size_t twice = 0;
  for (const auto& row : adjacency_) twice += row.size();
  return twice / 2;
}

bool Network::disable(NodeId n, DisableCause cause) {
  if (states_[n] != NodeState::Alive) return false;
  states_[n] = cause == DisableCause::Overload ? NodeState::DisabledOverload
                                               : NodeState::DisabledFault;
  if (cause == DisableCause::Fault) ++faulted_;

  const std::uint32_t pos = alive_pos_[n];
  const NodeId last = alive_.back();
  alive_[pos] = last;
  alive_pos_[last] = pos;
  alive_.pop_back();

  if (alive_degree_[n] > 0) --routable_;
  for (NodeId m : adjacency_[n]) {
    if (--alive_degree_[m] == 0 && states_[m] == NodeState::Alive) --routable_;
  }
  return true;
}

Network generate_network(const TonConfig& config, Rng& rng) {
  const std::size_t n = config.n_nodes;
  std::vector<std::vector<NodeId>> adjacency(n);
  const double p = config.density;
  if (p > 0.0) {
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        if (p >= 1.0 || rng.bernoulli(p)) {
          adjacency[i].push_back(j);
          adjacency[j].push_back(i);
        }
      }
    }
  }
  return Network(std::move(adjacency));
}

std::optional<NodeId> route_next(const Network& network, NodeId current, Rng& rng) {
  const auto nbrs = network.neighbors(current);
  const std::uint32_t alive = network.alive_neighbor_count(current);
  if (alive == 0) return std::nullopt;
  if (alive == nbrs.size()) return nbrs[rng.uniform_index(nbrs.size())];

  // Rejection from the full list is uniform over the alive subset; fall back
  // to an explicit scan when most neighbours are gone.
  if (4 * static_cast<std::size_t>(alive) >= nbrs.size()) {
    for (;;) {
      const NodeId candidate = nbrs[rng.uniform_index(nbrs.size())];
      if (network.alive(candidate)) return candidate;
    }
  }
  std::uint64_t k = rng.uniform_index(alive);
  for (NodeId m : nbrs) {
    if (network.alive(m) && k-- == 0) return m;
  }
  throw ContractViolation("route_next: alive neighbour count out of sync");
}

}  // namespace tonsim
