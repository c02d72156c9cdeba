#pragma once

#include <cstdint>

#include "tonsim/config.hpp"
#include "tonsim/experiments.hpp"
#include "tonsim/fitting.hpp"

namespace tonsim::flatten {

/// Flat upfront cost that gives the same ln r1 on the alpha = 1 slice of the
/// surface. Throws InvalidSurface if A >= 0 or B_psi == 0, InfeasibleRate if ln_r1 > c.
double flat_cost(const fitting::SurfaceFit& fit, double ln_r1);

/// Total cost of the original transaction over the total cost of its flat
/// replacement, total_txn_cost(psi0, alpha, L) / (L * psi0_prime).
/// Throws InvalidParameter if psi0_prime <= 0, L == 0 or alpha <= 0.
double flattening_ratio(double psi0, double alpha, std::uint32_t txn_length, double psi0_prime);

struct FlatteningResult {
  double psi0_prime = 0.0;
  double psi_ratio = 0.0;
  double alpha = 0.0;
  double psi0 = 0.0;
  std::uint32_t txn_length = 0;
  double ln_r1_target = 0.0;
  fitting::SurfaceFit surface;
};

/// Flattens (alpha, psi0) through the surface: the target is predict_ln_r1(fit, alpha, psi0).
FlatteningResult flatten(const fitting::SurfaceFit& fit, double alpha, double psi0,
                         std::uint32_t txn_length);

struct PrimeFactor {
  double alpha_prime = 0.0;
  double psi_at_peak = 0.0;
  std::uint32_t txn_length = 0;
  /// Part of the requested range was infeasible and was dropped.
  bool range_restricted = false;
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
};

/// Maximizes psi(alpha) over [alpha_lo, alpha_hi]: 32-point scan, then
/// golden-section search around the best scan point down to |d alpha| <= tol.
/// Throws DomainError if the range is invalid or nowhere feasible.
PrimeFactor prime_impact_factor(const fitting::SurfaceFit& fit, double psi0,
                                std::uint32_t txn_length, double alpha_lo, double alpha_hi,
                                double tol = 1e-6);

struct VerifyOptions {
  double rel_tol = 0.15;
  /// Fields compared for the verdict. r0 is always measured and reported.
  experiments::EquivalenceFields fields{false, true, false};
  /// Multiplies the computed flat cost; anything but 1 is a negative control.
  double psi0_prime_scale = 1.0;
  experiments::SearchOptions search;
};

struct FlatteningCheck {
  experiments::ResilienceProfile original;
  experiments::ResilienceProfile flattened;
  TonConfig flattened_config;
  double psi0_prime = 0.0;
  /// ln r1 of the original network as measured, which Ψ0' is solved for.
  double ln_r1_target = 0.0;
  bool equivalent = false;
};

/// Measures the original config, solves the flat cost for its measured r1,
/// measures the (alpha = 1, psi0 = psi0') network and compares.
/// With alpha already 1 the flattened config is the original.
FlatteningCheck verify_flattening(const TonConfig& config, const fitting::SurfaceFit& fit,
                                  const experiments::Ensemble& ensemble,
                                  const VerifyOptions& options = {});

}  // namespace tonsim::flatten
