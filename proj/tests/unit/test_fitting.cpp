#include <doctest.h>

#include <cmath>

#include "tonsim/error.hpp"
#include "tonsim/fitting.hpp"
#include "tonsim/rng.hpp"

using namespace tonsim;
using namespace tonsim::fitting;
using Pairs = std::vector<std::pair<double, double>>;

namespace {

bool rel_close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

std::vector<experiments::GridSample> synthetic_grid(const SurfaceFit& truth) {
  std::vector<experiments::GridSample> out;
  for (double a : {0.6, 0.8, 1.0, 1.2, 1.4}) {
    for (double p : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      experiments::GridSample s;
      s.alpha = a;
      s.psi0 = p;
      s.ln_r1 = predict_ln_r1(truth, a, p);
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("capacity law recovers a quadratic") {
  Pairs data;
  for (double c = 4; c <= 12; c += 1) data.emplace_back(c, 0.1 * (c - 2) * (c - 2));
  const auto fit = fit_capacity_law(data);
  CHECK(rel_close(fit.a_coef, 0.1, 1e-6));
  CHECK(rel_close(fit.beta, 2.0, 1e-6));
  CHECK(fit.goodness == doctest::Approx(1.0));
  CHECK(capacity_law(fit, 7.0) == doctest::Approx(2.5));
}

TEST_CASE("capacity law errors") {
  CHECK_THROWS_AS(fit_capacity_law(Pairs{{2.0, 1.0}, {4.0, 2.0}, {5.0, 3.0}}), DomainError);
  CHECK_THROWS_AS(fit_capacity_law(Pairs{{4.0, 1.0}, {5.0, 2.0}}), RankDeficiency);
  CHECK_THROWS_AS(fit_capacity_law(Pairs{{4.0, 1.0}, {4.0, 2.0}, {4.0, 3.0}}), RankDeficiency);
}

TEST_CASE("r0 versus r1") {
  Pairs data;
  for (double r1 : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0}) data.emplace_back(r1, predict_r0(1.0, 5.0, r1));
  const auto fit = fit_r0_vs_r1(data);
  CHECK(rel_close(fit.a, 1.0, 1e-6));
  CHECK(rel_close(fit.b, 5.0, 1e-6));
  CHECK(fit.a > 0.0);
  CHECK(fit.b > 0.0);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    CHECK(predict_r0(10 * rng.uniform01(), 10 * rng.uniform01(), 0.0) == 0.0);
  }
  CHECK_THROWS_AS(fit_r0_vs_r1(Pairs{{2, 1}, {2, 1.1}, {2, 0.9}}), RankDeficiency);
}

TEST_CASE("m0 versus rho0") {
  Pairs data;
  for (double rho : {0.0, 0.1, 0.2, 0.3, 0.45, 0.6, 0.8}) data.emplace_back(rho, predict_m0(1.2, 0.25, rho));
  const auto fit = fit_m0_vs_rho0(data);
  CHECK(rel_close(fit.delta_m, 1.2, 1e-6));
  CHECK(rel_close(fit.lambda, 0.25, 1e-6));

  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    CHECK(predict_m0(3 * rng.uniform01(), 0.01 + rng.uniform01(), 0.0) == 1.0);
  }
  CHECK_THROWS_AS(fit_m0_vs_rho0(Pairs{{0.2, 1}, {1.5, 1}, {0.3, 1}}), DomainError);
}

TEST_CASE("delta relation slope") {
  Pairs line;
  for (double rho : {0.1, 0.3, 0.5, 0.7}) line.emplace_back(rho, 1.3 - rho);
  CHECK(delta_relation_check(line) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(delta_relation_check(Pairs{{0.3, 1.0}, {0.3, 0.5}}), RankDeficiency);
  CHECK_THROWS_AS(delta_relation_check(Pairs{{0.3, 1.0}}), RankDeficiency);
}

TEST_CASE("surface recovery") {
  SurfaceFit truth;
  truth.big_a = -0.5;
  truth.b_psi = 0.9;
  truth.b_alpha = 3.0;
  truth.gamma_alpha = 1.0;
  truth.delta_alpha = -0.4;
  truth.c = 3.0;
  const auto fit = fit_surface(synthetic_grid(truth));
  CHECK(rel_close(fit.big_a, truth.big_a, 1e-4));
  CHECK(rel_close(fit.b_psi, truth.b_psi, 1e-4));
  CHECK(rel_close(fit.b_alpha, truth.b_alpha, 1e-4));
  CHECK(rel_close(std::abs(fit.gamma_alpha), truth.gamma_alpha, 1e-4));
  CHECK(rel_close(fit.delta_alpha, truth.delta_alpha, 1e-4));
  CHECK(rel_close(fit.c, truth.c, 1e-4));
  CHECK(fit.goodness > 0.999999);

  const auto again = fit_surface(synthetic_grid(truth));
  CHECK(again.big_a == fit.big_a);
  CHECK(again.best_start == fit.best_start);
}

TEST_CASE("surface with stderr weights still recovers noiseless data") {
  SurfaceFit truth{-1.8, 0.9, 1.2, 1.0, -0.4, 5.5};
  auto grid = synthetic_grid(truth);
  Rng rng(8);
  for (auto& s : grid) s.std_error = 0.01 + 0.1 * rng.uniform01();
  const auto fit = fit_surface(grid);
  CHECK(rel_close(fit.b_psi, 0.9, 1e-4));
  CHECK(rel_close(fit.c, 5.5, 1e-4));
}

TEST_CASE("surface preconditions") {
  SurfaceFit truth{-0.5, 0.9, 3.0, 1.0, -0.4, 3.0};
  auto grid = synthetic_grid(truth);
  const std::vector<experiments::GridSample> few(grid.begin(), grid.begin() + 2);
  CHECK_THROWS_AS(fit_surface(few), RankDeficiency);
  std::vector<experiments::GridSample> one_alpha(grid.begin(), grid.begin() + 5);
  one_alpha.insert(one_alpha.end(), grid.begin(), grid.begin() + 3);
  CHECK_THROWS_AS(fit_surface(one_alpha), InvalidParameter);
}

TEST_CASE("predict_ln_r1") {
  SurfaceFit fit{-0.5, 0.9, 3.0, 1.0, -0.4, 3.0};
  CHECK(predict_ln_r1(fit, 1.0, 1e-12) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK_THROWS_AS(predict_ln_r1(fit, 1.0, 0.0), DomainError);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    SurfaceFit f{-5 * rng.uniform01(), 2 * rng.uniform01(), 10 * rng.uniform01(),
                 2 * rng.uniform01(), rng.uniform01() - 0.5, 10 * rng.uniform01() - 5};
    REQUIRE(predict_ln_r1(f, 0.1 + 2 * rng.uniform01(), 0.01 + 5 * rng.uniform01()) <= f.c);
  }
}
