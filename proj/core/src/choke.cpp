#include "tonsim/choke.hpp"

#include <cmath>

#include "tonsim/error.hpp"

namespace tonsim {

void validate(const ChokeCriterion& criterion) {
  if (criterion.window < 1) throw InvalidParameter("choke window must be >= 1");
  if (!(criterion.commit_floor >= 0.0 && criterion.commit_floor < 1.0)) {
    throw InvalidParameter("choke commit_floor must lie in [0, 1)");
  }
}

std::optional<std::size_t> detect_choke(std::span<const double> window_commit_fractions,
                                        const ChokeCriterion& criterion) {
  for (std::size_t i = 0; i < window_commit_fractions.size(); ++i) {
    if (window_commit_fractions[i] <= criterion.commit_floor) return i;
  }
  return std::nullopt;
}

}  // namespace tonsim
