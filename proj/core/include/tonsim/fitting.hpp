#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tonsim/experiments.hpp"
#include "tonsim/lm.hpp"

namespace tonsim::fitting {

/// r = a_coef * (C - 2)^beta, fitted in log-log space.
struct CapacityLawFit {
  double a_coef = 0.0;
  double beta = 0.0;
  double goodness = 0.0;
  bool converged = false;
};

/// r0 = a * (sqrt(b^2 + r1^2) - b).
struct R0R1Fit {
  double a = 0.0;
  double b = 0.0;
  double goodness = 0.0;
  bool converged = false;
};

/// m0 = delta_m - (delta_m - 1) * sqrt(1 + (rho0 / lambda)^2).
struct M0Fit {
  double delta_m = 0.0;
  double lambda = 0.0;
  double goodness = 0.0;
  bool converged = false;
};

/// ln r1 = big_a * psi0^b_psi * ((alpha + delta_alpha)^2 + gamma_alpha^2)^b_alpha + c.
struct SurfaceFit {
  double big_a = 0.0;
  double b_psi = 0.0;
  double b_alpha = 0.0;
  double gamma_alpha = 0.0;
  double delta_alpha = 0.0;
  double c = 0.0;
  double goodness = 0.0;
  bool converged = false;
  /// Index of the winning start (lowest cost, ties to the lower index).
  int best_start = -1;
};

/// Used for both r0 and r1 laws. `samples` are (C, r) pairs with r > 0.
/// Throws DomainError if any C <= 2 or r <= 0, RankDeficiency for fewer than 3 samples.
CapacityLawFit fit_capacity_law(std::span<const std::pair<double, double>> samples);

double capacity_law(const CapacityLawFit& fit, double capacity);

/// `samples` are (r1, r0) pairs. Throws RankDeficiency if all r1 are equal.
R0R1Fit fit_r0_vs_r1(std::span<const std::pair<double, double>> samples);

double predict_r0(double a, double b, double r1);

/// `samples` are (rho0, m0) pairs.
M0Fit fit_m0_vs_rho0(std::span<const std::pair<double, double>> samples);

double predict_m0(double delta_m, double lambda, double rho0);

/// Ordinary least-squares slope of m0 against rho0.
/// Throws RankDeficiency unless there are two samples with distinct rho0.
double delta_relation_check(std::span<const std::pair<double, double>> samples);

struct SurfaceOptions {
  std::size_t starts = 16;
  std::uint64_t seed = 0x5eedf17ULL;
  /// Floor applied to stderr before weighting by 1/stderr^2.
  double stderr_floor = 0.01;
};

/// Multi-start fit over grid samples with finite ln_r1. Samples are weighted
/// by 1/max(stderr, floor)^2 when every sample has stderr > 0, else equally.
/// Throws RankDeficiency for fewer than 7 usable samples, InvalidParameter for
/// fewer than two distinct values of either alpha or psi0.
SurfaceFit fit_surface(std::span<const experiments::GridSample> samples,
                       const SurfaceOptions& options = {});

/// Throws DomainError if psi0 <= 0.
double predict_ln_r1(const SurfaceFit& fit, double alpha, double psi0);

}  // namespace tonsim::fitting
