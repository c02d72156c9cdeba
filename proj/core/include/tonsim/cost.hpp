#pragma once

#include <cstdint>
#include <vector>

#include "tonsim/config.hpp"
#include "tonsim/network.hpp"

namespace tonsim {

/// Cost charged to the host of subtransaction `index` (1-based): the
/// transient cost psi0 plus the long-term overhead psi0 * (alpha^(index-1) - 1).
double subtxn_cost(std::uint32_t index, std::uint32_t txn_length, double psi0, double alpha);

/// Total cost of a committed transaction, psi0 * (alpha^L - 1) / (alpha - 1),
/// with the limit psi0 * L at alpha == 1.
double total_txn_cost(double psi0, double alpha, std::uint32_t txn_length);

/// Per-node decayed cumulative cost Xi and the time it was last decayed.
/// Decay is applied lazily, only when an event touches the node.
class CostLedger {
 public:
  CostLedger(std::size_t n_nodes, double decay_time);

  double xi(NodeId n) const { return xi_[n]; }
  double last_decay_time(NodeId n) const { return last_decay_[n]; }
  double decay_time() const { return decay_time_; }

  /// Brings node n forward to `now` and returns the decayed Xi.
  /// Throws ClockError if `now` precedes the last decay time.
  double apply_decay(NodeId n, double now);

  /// Test hook: overwrite a node's state.
  void set(NodeId n, double xi, double at) {
    xi_[n] = xi;
    last_decay_[n] = at;
  }

 private:
  std::vector<double> xi_;
  std::vector<double> last_decay_;
  double decay_time_;
};

enum class ChargeOutcome : std::uint8_t { Accepted, NodeDied };

/// Decays the node to `now`, then adds the cost of subtransaction `index`.
/// If Xi reaches the capacity the node is disabled (Overload) and NodeDied is
/// returned; the caller aborts whatever the node was hosting.
/// Throws ContractViolation if the node is already disabled.
ChargeOutcome add_subtxn_cost(CostLedger& ledger, Network& network, NodeId node,
                              std::uint32_t index, const TonConfig& config, double now);

}  // namespace tonsim
