#include "tonsim/config.hpp"

#include <cmath>
#include <string>

#include "tonsim/error.hpp"

namespace tonsim {
namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw InvalidParameter(std::string(field) + ": " + what);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const TonConfig& c) {
  require(c.n_nodes >= 2, "n_nodes", "must be >= 2");
  require(std::isfinite(c.density) && c.density >= 0.0 && c.density <= 1.0, "density",
          "must lie in [0, 1]");
  require(positive(c.capacity), "capacity", "must be > 0");
  require(c.txn_length >= 1, "txn_length", "must be >= 1");
  require(positive(c.subtxn_time), "subtxn_time", "must be > 0");
  require(positive(c.sim_duration), "sim_duration", "must be > 0");
  require(positive(c.decay_time), "decay_time", "must be > 0");
  require(std::isfinite(c.psi0) && c.psi0 >= 0.0, "psi0", "must be >= 0");
  require(positive(c.alpha), "alpha", "must be > 0");
  require(std::isfinite(c.injection_rate) && c.injection_rate >= 0.0, "injection_rate",
          "must be >= 0");
  if (c.fault_mean_delay) {
    require(positive(*c.fault_mean_delay), "fault_mean_delay", "must be > 0 when enabled");
  }
}

TonConfig desk_config() {
  TonConfig c;
  c.n_nodes = 200;
  c.sim_duration = 3650.0;
  return c;
}

}  // namespace tonsim
