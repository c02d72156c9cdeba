#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tonsim/config.hpp"
#include "tonsim/rng.hpp"

namespace tonsim {

using NodeId = std::uint32_t;

enum class NodeState : std::uint8_t { Alive, DisabledOverload, DisabledFault };

enum class DisableCause : std::uint8_t { Overload, Fault };

/// Undirected simple graph plus per-node liveness.
///
/// Keeps an index of alive nodes (for uniform source selection) and, per node,
/// the number of alive neighbours (so "all neighbours disabled" is O(1)).
/// A disabled node never comes back.
class Network {
 public:
  explicit Network(std::vector<std::vector<NodeId>> adjacency);

  std::size_t size() const { return adjacency_.size(); }
  std::span<const NodeId> neighbors(NodeId n) const { return adjacency_[n]; }
  std::size_t edge_count() const;

  NodeState state(NodeId n) const { return states_[n]; }
  bool alive(NodeId n) const { return states_[n] == NodeState::Alive; }
  std::size_t alive_count() const { return alive_.size(); }
  std::size_t disabled_count() const { return size() - alive_.size(); }
  std::size_t fault_count() const { return faulted_; }
  std::uint32_t alive_neighbor_count(NodeId n) const { return alive_degree_[n]; }

  /// Alive nodes that still have at least one alive neighbour. When this hits
  /// zero no transaction longer than one hop can commit.
  std::size_t routable_count() const { return routable_; }

  /// i-th alive node in an internal order that is a deterministic function of
  /// the disable history.
  NodeId alive_at(std::size_t i) const { return alive_[i]; }

  /// Returns false (and changes nothing) if the node is already disabled.
  bool disable(NodeId n, DisableCause cause);

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<NodeState> states_;
  std::vector<NodeId> alive_;
  std::vector<std::uint32_t> alive_pos_;
  std::vector<std::uint32_t> alive_degree_;
  std::size_t routable_ = 0;
  std::size_t faulted_ = 0;
};

/// G(N, p=density): every unordered pair is an edge independently with
/// probability density. All nodes start Alive.
Network generate_network(const TonConfig& config, Rng& rng);

/// Uniform choice among alive neighbours of `current`. The graph has no
/// self-loops, so `current` is never returned; the previous host is allowed.
/// Empty when every neighbour is disabled.
std::optional<NodeId> route_next(const Network& network, NodeId current, Rng& rng);

}  // namespace tonsim
