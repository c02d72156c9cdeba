#include "tonsim/cost.hpp"

#include <cmath>
#include <string>

#include "tonsim/error.hpp"

namespace tonsim {

double subtxn_cost(std::uint32_t index, std::uint32_t txn_length, double psi0, double alpha) {
  if (index < 1 || index > txn_length) {
    throw InvalidParameter("subtxn_cost: index " + std::to_string(index) + " outside 1.." +
                           std::to_string(txn_length));
  }
  return psi0 * std::pow(alpha, static_cast<double>(index - 1));
}

double total_txn_cost(double psi0, double alpha, std::uint32_t txn_length) {
  if (txn_length < 1) throw InvalidParameter("total_txn_cost: txn_length must be >= 1");
  if (!(alpha > 0.0)) throw InvalidParameter("total_txn_cost: alpha must be > 0");
  const double l = txn_length;
  if (alpha == 1.0) return psi0 * l;
  // expm1/log1p keep full precision when alpha is close to 1.
  return psi0 * std::expm1(l * std::log(alpha)) / (alpha - 1.0);
}

CostLedger::CostLedger(std::size_t n_nodes, double decay_time)
    : xi_(n_nodes, 0.0), last_decay_(n_nodes, 0.0), decay_time_(decay_time) {}

double CostLedger::apply_decay(NodeId n, double now) {
  const double dt = now - last_decay_[n];
  if (dt < 0.0) {
    throw ClockError("apply_decay: now precedes last decay time of node " + std::to_string(n));
  }
  if (dt > 0.0) {
    xi_[n] *= std::exp(-dt / decay_time_);
    last_decay_[n] = now;
  }
  return xi_[n];
}

ChargeOutcome add_subtxn_cost(CostLedger& ledger, Network& network, NodeId node,
                              std::uint32_t index, const TonConfig& config, double now) {
  if (!network.alive(node)) {
    throw ContractViolation("add_subtxn_cost: node " + std::to_string(node) + " is disabled");
  }
  const double xi = ledger.apply_decay(node, now) +
                    subtxn_cost(index, config.txn_length, config.psi0, config.alpha);
  ledger.set(node, xi, now);
  if (xi >= config.capacity) {
    network.disable(node, DisableCause::Overload);
    return ChargeOutcome::NodeDied;
  }
  return ChargeOutcome::Accepted;
}

}  // namespace tonsim
