#include "tonsim/rng.hpp"

#include <cmath>

namespace tonsim {

double Rng::exponential_mean(double mean) {
  // Midpoint of a 53-bit cell, so the argument of log is in (0, 1).
  const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  return -mean * std::log(u);
}

}  // namespace tonsim
