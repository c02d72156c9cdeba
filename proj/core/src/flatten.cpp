#include "tonsim/flatten.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "tonsim/cost.hpp"
#include "tonsim/error.hpp"

namespace tonsim::flatten {

double flat_cost(const fitting::SurfaceFit& fit, double ln_r1) {
  if (!(fit.big_a < 0.0)) throw InvalidSurface("flat_cost: A must be negative");
  if (fit.b_psi == 0.0) throw InvalidSurface("flat_cost: B_psi must be non-zero");
  if (ln_r1 > fit.c) throw InfeasibleRate("flat_cost: ln r1 exceeds the surface asymptote c");
  const double one_d = 1.0 + fit.delta_alpha;
  const double base = one_d * one_d + fit.gamma_alpha * fit.gamma_alpha;
  const double denom = -fit.big_a * std::pow(base, fit.b_alpha);
  return std::pow((fit.c - ln_r1) / denom, 1.0 / fit.b_psi);
}

double flattening_ratio(double psi0, double alpha, std::uint32_t txn_length, double psi0_prime) {
  if (!(psi0_prime > 0.0)) throw InvalidParameter("flattening_ratio: psi0_prime must be positive");
  if (txn_length == 0) throw InvalidParameter("flattening_ratio: txn_length must be >= 1");
  if (!(alpha > 0.0)) throw InvalidParameter("flattening_ratio: alpha must be positive");
  return total_txn_cost(psi0, alpha, txn_length) / (static_cast<double>(txn_length) * psi0_prime);
}

FlatteningResult flatten(const fitting::SurfaceFit& fit, double alpha, double psi0,
                         std::uint32_t txn_length) {
  FlatteningResult out;
  out.alpha = alpha;
  out.psi0 = psi0;
  out.txn_length = txn_length;
  out.surface = fit;
  out.ln_r1_target = fitting::predict_ln_r1(fit, alpha, psi0);
  out.psi0_prime = flat_cost(fit, out.ln_r1_target);
  out.psi_ratio = flattening_ratio(psi0, alpha, txn_length, out.psi0_prime);
  return out;
}

namespace {

// psi(alpha), or -inf where the flat cost degenerates to zero.
double psi_of(const fitting::SurfaceFit& fit, double psi0, std::uint32_t L, double alpha) {
  const double prime = flat_cost(fit, fitting::predict_ln_r1(fit, alpha, psi0));
  if (!(prime > 0.0) || !std::isfinite(prime)) return -std::numeric_limits<double>::infinity();
  return flattening_ratio(psi0, alpha, L, prime);
}

}  // namespace

PrimeFactor prime_impact_factor(const fitting::SurfaceFit& fit, double psi0,
                                std::uint32_t txn_length, double alpha_lo, double alpha_hi,
                                double tol) {
  if (!(alpha_lo > 0.0) || !(alpha_hi > alpha_lo)) {
    throw DomainError("prime_impact_factor: need 0 < alpha_lo < alpha_hi");
  }
  if (!(tol > 0.0)) throw InvalidParameter("prime_impact_factor: tol must be positive");
  // Surface validity is checked once up front so that infeasibility below is
  // only about individual alpha values.
  (void)flat_cost(fit, fit.c);

  constexpr int kScan = 32;
  std::array<double, kScan> xs{};
  std::array<double, kScan> ys{};
  int best = -1;
  int first_ok = -1;
  int last_ok = -1;
  for (int i = 0; i < kScan; ++i) {
    xs[i] = alpha_lo + (alpha_hi - alpha_lo) * i / (kScan - 1);
    ys[i] = psi_of(fit, psi0, txn_length, xs[i]);
    if (!std::isfinite(ys[i])) continue;
    if (first_ok < 0) first_ok = i;
    last_ok = i;
    if (best < 0 || ys[i] > ys[best]) best = i;
  }
  if (best < 0) throw DomainError("prime_impact_factor: no feasible alpha in range");

  PrimeFactor out;
  out.txn_length = txn_length;
  out.alpha_lo = xs[first_ok];
  out.alpha_hi = xs[last_ok];
  out.range_restricted = first_ok > 0 || last_ok < kScan - 1;

  double a = xs[std::max(best - 1, first_ok)];
  double b = xs[std::min(best + 1, last_ok)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = psi_of(fit, psi0, txn_length, x1);
  double f2 = psi_of(fit, psi0, txn_length, x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = psi_of(fit, psi0, txn_length, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = psi_of(fit, psi0, txn_length, x2);
    }
  }
  double x = 0.5 * (a + b);
  double fx = psi_of(fit, psi0, txn_length, x);
  // Never return worse than the scan's best point.
  if (!(fx >= ys[best])) {
    x = xs[best];
    fx = ys[best];
  }
  out.alpha_prime = x;
  out.psi_at_peak = fx;
  return out;
}

FlatteningCheck verify_flattening(const TonConfig& config, const fitting::SurfaceFit& fit,
                                  const experiments::Ensemble& ensemble,
                                  const VerifyOptions& options) {
  FlatteningCheck out;
  TonConfig base = config;
  base.fault_mean_delay.reset();
  out.original = experiments::resilience_profile(base, ensemble, options.search);
  out.ln_r1_target = std::log(out.original.r1);

  out.flattened_config = base;
  if (config.alpha == 1.0) {
    out.psi0_prime = config.psi0 * options.psi0_prime_scale;
  } else {
    out.psi0_prime = flat_cost(fit, out.ln_r1_target) * options.psi0_prime_scale;
  }
  out.flattened_config.alpha = 1.0;
  out.flattened_config.psi0 = out.psi0_prime;

  if (out.flattened_config == base) {
    out.flattened = out.original;
  } else {
    validate(out.flattened_config);
    out.flattened = experiments::resilience_profile(out.flattened_config, ensemble, options.search);
  }
  out.equivalent = experiments::behaviorally_equivalent(out.original, out.flattened,
                                                        options.rel_tol, options.fields);
  return out;
}

}  // namespace tonsim::flatten
