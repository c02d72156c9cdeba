#include <doctest.h>

#include "sim_properties.hpp"

TEST_CASE("simulator invariants over 1000 random configurations") {
  const auto report = tonsim::testing::run_property_suite(1000, 0xC0FFEE);
  CHECK(report.cases == 1000);
  for (const auto& [what, count] : report.failures) {
    INFO(what);
    CHECK(count == 0);
  }
}
