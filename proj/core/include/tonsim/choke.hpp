#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace tonsim {

/// Operational definition of "the network choked": a window of `window`
/// consecutive injected transactions commits at most `commit_floor` of them,
/// or no alive node is left that can route.
struct ChokeCriterion {
  std::size_t window = 1000;
  double commit_floor = 0.01;

  bool operator==(const ChokeCriterion&) const = default;
};

/// Throws InvalidParameter unless window >= 1 and 0 <= commit_floor < 1.
void validate(const ChokeCriterion& criterion);

/// Index of the first window whose commit fraction is <= the floor.
std::optional<std::size_t> detect_choke(std::span<const double> window_commit_fractions,
                                        const ChokeCriterion& criterion);

}  // namespace tonsim
