#pragma once

#include <cstdint>
#include <optional>

namespace tonsim {

/// Full parameterization of one network and cost scenario.
///
/// Times are in units of the subtransaction duration unless subtxn_time is
/// changed. Defaults are the production-scale values (N=1000, d=0.5, C=10,
/// L=10, S=36500, H=30).
struct TonConfig {
  std::uint32_t n_nodes = 1000;
  double density = 0.5;
  double capacity = 10.0;
  std::uint32_t txn_length = 10;
  double subtxn_time = 1.0;
  double sim_duration = 36500.0;
  double decay_time = 30.0;
  double psi0 = 1.0;
  double alpha = 1.0;
  double injection_rate = 1.0;
  /// Mean delay before a node's internal fault. Empty means faults are disabled.
  std::optional<double> fault_mean_delay;
  std::uint64_t seed = 0;

  bool operator==(const TonConfig&) const = default;
};

/// Throws InvalidParameter naming the first offending field.
///
/// density == 0 and injection_rate == 0 are accepted: both are degenerate but
/// well-defined (empty graph, no traffic).
void validate(const TonConfig& config);

/// Desk-scale reference: N=200, S=3650, everything else at the defaults.
TonConfig desk_config();

}  // namespace tonsim
