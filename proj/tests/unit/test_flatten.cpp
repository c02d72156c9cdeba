#include <doctest.h>

#include <cmath>

#include "tonsim/cost.hpp"
#include "tonsim/error.hpp"
#include "tonsim/flatten.hpp"
#include "tonsim/rng.hpp"

using namespace tonsim;
using namespace tonsim::flatten;
using fitting::SurfaceFit;

namespace {

SurfaceFit reference() { return SurfaceFit{-0.5, 0.9, 3.0, 1.0, -0.4, 3.0}; }

SurfaceFit random_fit(Rng& rng) {
  return SurfaceFit{-(0.01 + 3 * rng.uniform01()), 0.2 + 1.5 * rng.uniform01(),
                    0.5 + 10 * rng.uniform01(), 0.2 + 1.5 * rng.uniform01(),
                    -0.8 + 0.8 * rng.uniform01(), -2 + 8 * rng.uniform01()};
}

// d ln S_L / d alpha where S_L = sum_{i<L} alpha^i.
double dlog_series(double a, int L) {
  double s = 0, ds = 0;
  for (int i = 0; i < L; ++i) {
    s += std::pow(a, i);
    if (i > 0) ds += i * std::pow(a, i - 1);
  }
  return ds / s;
}

}  // namespace

TEST_CASE("flat_cost inverts the alpha = 1 slice") {
  const SurfaceFit fit = reference();
  for (double psi0 : {0.1, 0.5, 1.0, 2.0, 7.0}) {
    CHECK(flat_cost(fit, fitting::predict_ln_r1(fit, 1.0, psi0)) ==
          doctest::Approx(psi0).epsilon(1e-12));
  }
  CHECK(flat_cost(fit, fit.c) == 0.0);
}

TEST_CASE("flat_cost errors") {
  SurfaceFit fit = reference();
  CHECK_THROWS_AS(flat_cost(fit, fit.c + 0.1), InfeasibleRate);
  fit.big_a = 0.0;
  CHECK_THROWS_AS(flat_cost(fit, 0.0), InvalidSurface);
  fit = reference();
  fit.b_psi = 0.0;
  CHECK_THROWS_AS(flat_cost(fit, 0.0), InvalidSurface);
}

TEST_CASE("inverse identity over random fits") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const SurfaceFit fit = random_fit(rng);
    const double x = fit.c - 5.0 * rng.uniform01();
    const double back = fitting::predict_ln_r1(fit, 1.0, flat_cost(fit, x));
    REQUIRE(std::abs(back - x) <= 1e-9);
  }
}

TEST_CASE("flat_cost strictly decreases in ln r1") {
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const SurfaceFit fit = random_fit(rng);
    const double x = fit.c - 0.01 - 5.0 * rng.uniform01();
    REQUIRE(flat_cost(fit, x) > flat_cost(fit, x + 0.005));
  }
}

TEST_CASE("flattening_ratio") {
  CHECK(flattening_ratio(1.0, 1.0, 10, 1.0) == 1.0);
  CHECK(flattening_ratio(1.0, 2.0, 3, 7.0 / 3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(flattening_ratio(3.0, 1.0, 10, 1.5) == 2.0);
  CHECK_THROWS_AS(flattening_ratio(1.0, 1.0, 10, 0.0), InvalidParameter);
  CHECK_THROWS_AS(flattening_ratio(1.0, 1.0, 0, 1.0), InvalidParameter);

  // Continuity of the limit form at alpha = 1.
  for (std::uint32_t L : {2u, 6u, 10u, 14u}) {
    const double at = flattening_ratio(1.3, 1.0, L, 0.9);
    CHECK(std::abs(flattening_ratio(1.3, 1.0 + 1e-6, L, 0.9) - at) < 1e-4);
    CHECK(std::abs(flattening_ratio(1.3, 1.0 - 1e-6, L, 0.9) - at) < 1e-4);
  }
}

TEST_CASE("flatten at alpha = 1 is the identity") {
  const auto r = flatten::flatten(reference(), 1.0, 1.7, 10);
  CHECK(r.psi0_prime == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(r.psi_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("prime impact factor finds a constructed maximum") {
  // Choose B_alpha so that d ln psi / d alpha = 0 at alpha = 0.9:
  // d ln S_L = (B_alpha / B_psi) * 2 (alpha + delta) / ((alpha + delta)^2 + gamma^2).
  const int L = 10;
  const double target = 0.9;
  SurfaceFit fit = reference();
  fit.delta_alpha = -0.8;
  fit.gamma_alpha = 0.5;
  const double u = target + fit.delta_alpha;
  fit.b_alpha = fit.b_psi * dlog_series(target, L) * (u * u + fit.gamma_alpha * fit.gamma_alpha) / (2 * u);

  // Oracle: dense scan.
  double best_a = 0, best_v = -1;
  for (int i = 0; i <= 100000; ++i) {
    const double a = 0.5 + i * 1e-5;
    const double v = flattening_ratio(1.0, a, L, flat_cost(fit, fitting::predict_ln_r1(fit, a, 1.0)));
    if (v > best_v) {
      best_v = v;
      best_a = a;
    }
  }
  CHECK(std::abs(best_a - target) < 2e-5);

  const double tol = 1e-6;
  const auto pf = prime_impact_factor(fit, 1.0, L, 0.5, 1.5, tol);
  CHECK(std::abs(pf.alpha_prime - target) < 1e-5);
  CHECK(pf.psi_at_peak == doctest::Approx(best_v).epsilon(1e-9));
  CHECK(pf.psi_at_peak >= 1.0);
  CHECK(pf.txn_length == L);
  CHECK_FALSE(pf.range_restricted);

  // Golden-section postcondition against the range ends.
  for (double end : {0.5, 1.5}) {
    CHECK(pf.psi_at_peak >=
          flattening_ratio(1.0, end, L, flat_cost(fit, fitting::predict_ln_r1(fit, end, 1.0))));
  }
}

TEST_CASE("psi does not depend on psi0") {
  const SurfaceFit fit = reference();
  const auto a = prime_impact_factor(fit, 0.5, 8, 0.5, 1.5);
  const auto b = prime_impact_factor(fit, 3.0, 8, 0.5, 1.5);
  CHECK(a.alpha_prime == doctest::Approx(b.alpha_prime).epsilon(1e-5));
}

TEST_CASE("prime impact factor errors") {
  SurfaceFit fit = reference();
  CHECK_THROWS_AS(prime_impact_factor(fit, 1.0, 10, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(prime_impact_factor(fit, 1.0, 10, 1.2, 1.0), DomainError);
  fit.big_a = 1.0;
  CHECK_THROWS_AS(prime_impact_factor(fit, 1.0, 10, 0.5, 1.5), InvalidSurface);
}

TEST_CASE("degenerate points are dropped from the range") {
  // gamma = 0 makes the shape vanish at alpha = -delta, where the flat cost is 0.
  SurfaceFit fit = reference();
  fit.gamma_alpha = 0.0;
  fit.delta_alpha = -0.5;
  const auto pf = prime_impact_factor(fit, 1.0, 10, 0.5, 1.5);
  CHECK(pf.range_restricted);
  CHECK(pf.alpha_lo > 0.5);
  CHECK(std::isfinite(pf.psi_at_peak));
}

TEST_CASE("verify_flattening with alpha already 1") {
  TonConfig c;
  c.n_nodes = 60;
  c.sim_duration = 1200.0;
  experiments::Ensemble e;
  e.seeds = 3;
  e.choke.window = 200;
  const auto check = verify_flattening(c, reference(), e);
  CHECK(check.flattened_config == c);
  CHECK(check.equivalent);
  CHECK(check.flattened.r1 == check.original.r1);
}
