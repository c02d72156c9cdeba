#include "tonsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tonsim/error.hpp"
#include "tonsim/rng.hpp"

namespace tonsim::fitting {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_samples(std::size_t n, std::size_t min, const char* who) {
  if (n < min) {
    throw RankDeficiency(std::string(who) + ": need at least " + std::to_string(min) +
                         " samples, got " + std::to_string(n));
  }
}

bool all_equal(std::span<const std::pair<double, double>> samples) {
  return std::all_of(samples.begin(), samples.end(),
                     [&](const auto& s) { return s.first == samples.front().first; });
}

// Closed-form y = c0 + c1 * x by weighted least squares; {c0, c1}.
std::pair<double, double> linear_ls(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> w) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return {my, 0.0};
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

double eq5(double a, double b, double r1) { return a * (std::hypot(b, r1) - b); }

double eq6(double dm, double lambda, double rho) {
  return dm - (dm - 1.0) * std::sqrt(1.0 + (rho / lambda) * (rho / lambda));
}

// The non-linear factor of the surface: psi0^b_psi * ((alpha + delta)^2 + gamma^2)^b_alpha.
double surface_shape(double alpha, double psi0, double b_psi, double b_alpha, double gamma,
                     double delta) {
  const double base = (alpha + delta) * (alpha + delta) + gamma * gamma;
  return std::pow(psi0, b_psi) * std::pow(base, b_alpha);
}

}  // namespace

CapacityLawFit fit_capacity_law(std::span<const std::pair<double, double>> samples) {
  require_samples(samples.size(), 3, "fit_capacity_law");
  std::vector<Observation> obs;
  std::vector<double> xs, ys;
  for (const auto& [cap, r] : samples) {
    if (!(cap > 2.0)) throw DomainError("fit_capacity_law: capacity must exceed 2");
    if (!(r > 0.0)) throw DomainError("fit_capacity_law: rates must be positive");
    obs.push_back({{std::log(cap - 2.0), 0.0}, std::log(r), 1.0});
    xs.push_back(std::log(cap - 2.0));
    ys.push_back(std::log(r));
  }
  if (all_equal(samples)) throw RankDeficiency("fit_capacity_law: all capacities are equal");

  const std::vector<double> w(xs.size(), 1.0);
  const auto [ln_a, beta] = linear_ls(xs, ys, w);
  const Model model = [](const std::array<double, 2>& x, std::span<const double> p) {
    return p[0] + p[1] * x[0];
  };
  const std::vector<double> init{ln_a, beta};
  const LmResult res = lm_fit(model, obs, init);
  return {std::exp(res.params[0]), res.params[1], res.goodness, res.converged};
}

double capacity_law(const CapacityLawFit& fit, double capacity) {
  if (!(capacity > 2.0)) throw DomainError("capacity_law: capacity must exceed 2");
  return fit.a_coef * std::pow(capacity - 2.0, fit.beta);
}

R0R1Fit fit_r0_vs_r1(std::span<const std::pair<double, double>> samples) {
  require_samples(samples.size(), 3, "fit_r0_vs_r1");
  for (const auto& [r1, r0] : samples) {
    if (!(r1 >= 0.0) || !(r0 >= 0.0)) throw DomainError("fit_r0_vs_r1: rates must be >= 0");
  }
  if (all_equal(samples)) throw RankDeficiency("fit_r0_vs_r1: all r1 values are equal");

  std::vector<Observation> obs;
  double r1_max = 0.0;
  for (const auto& [r1, r0] : samples) {
    obs.push_back({{r1, 0.0}, r0, 1.0});
    r1_max = std::max(r1_max, r1);
  }

  // Scan b geometrically; for each, a follows by linear least squares.
  double best_a = 1.0, best_b = 1.0, best_cost = kInf;
  for (int k = -40; k <= 40; ++k) {
    const double b = std::max(r1_max, 1e-6) * std::pow(10.0, k / 10.0);
    double num = 0, den = 0;
    for (const auto& o : obs) {
      const double g = std::hypot(b, o.x[0]) - b;
      num += g * o.y;
      den += g * g;
    }
    if (den <= 0.0 || num <= 0.0) continue;
    const double a = num / den;
    double cost = 0;
    for (const auto& o : obs) cost += std::pow(o.y - eq5(a, b, o.x[0]), 2);
    if (cost < best_cost) {
      best_cost = cost;
      best_a = a;
      best_b = b;
    }
  }

  const Model model = [](const std::array<double, 2>& x, std::span<const double> p) {
    return eq5(p[0], p[1], x[0]);
  };
  const std::vector<double> init{best_a, best_b};
  const Bounds bounds{{1e-12, 1e-12}, {kInf, kInf}};
  const LmResult res = lm_fit(model, obs, init, bounds);
  return {res.params[0], res.params[1], res.goodness, res.converged};
}

double predict_r0(double a, double b, double r1) { return eq5(a, b, r1); }

M0Fit fit_m0_vs_rho0(std::span<const std::pair<double, double>> samples) {
  require_samples(samples.size(), 3, "fit_m0_vs_rho0");
  for (const auto& [rho, m0] : samples) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("fit_m0_vs_rho0: rho0 must lie in [0, 1]");
    if (!std::isfinite(m0)) throw DomainError("fit_m0_vs_rho0: m0 must be finite");
  }
  if (all_equal(samples)) throw RankDeficiency("fit_m0_vs_rho0: all rho0 values are equal");

  std::vector<Observation> obs;
  for (const auto& [rho, m0] : samples) obs.push_back({{rho, 0.0}, m0, 1.0});

  // Scan lambda; for each, (delta_m - 1) follows linearly from m0 - 1 = (delta_m - 1)(1 - s).
  double best_dm = 1.2, best_lambda = 0.25, best_cost = kInf;
  for (int k = -40; k <= 30; ++k) {
    const double lambda = std::pow(10.0, k / 10.0);
    double num = 0, den = 0;
    for (const auto& o : obs) {
      const double g = 1.0 - std::sqrt(1.0 + (o.x[0] / lambda) * (o.x[0] / lambda));
      num += g * (o.y - 1.0);
      den += g * g;
    }
    if (den <= 0.0) continue;
    const double dm = 1.0 + num / den;
    double cost = 0;
    for (const auto& o : obs) cost += std::pow(o.y - eq6(dm, lambda, o.x[0]), 2);
    if (cost < best_cost) {
      best_cost = cost;
      best_dm = dm;
      best_lambda = lambda;
    }
  }

  const Model model = [](const std::array<double, 2>& x, std::span<const double> p) {
    return eq6(p[0], p[1], x[0]);
  };
  const std::vector<double> init{best_dm, best_lambda};
  const Bounds bounds{{-kInf, 1e-9}, {kInf, kInf}};
  const LmResult res = lm_fit(model, obs, init, bounds);
  return {res.params[0], res.params[1], res.goodness, res.converged};
}

double predict_m0(double delta_m, double lambda, double rho0) { return eq6(delta_m, lambda, rho0); }

double delta_relation_check(std::span<const std::pair<double, double>> samples) {
  require_samples(samples.size(), 2, "delta_relation_check");
  if (all_equal(samples)) throw RankDeficiency("delta_relation_check: rho0 values are all equal");
  std::vector<double> xs, ys;
  for (const auto& [rho, m0] : samples) {
    xs.push_back(rho);
    ys.push_back(m0);
  }
  const std::vector<double> w(xs.size(), 1.0);
  return linear_ls(xs, ys, w).second;
}

SurfaceFit fit_surface(std::span<const experiments::GridSample> samples,
                       const SurfaceOptions& options) {
  std::vector<Observation> obs;
  bool all_have_stderr = true;
  for (const auto& s : samples) {
    if (!std::isfinite(s.ln_r1)) continue;
    if (!(s.psi0 > 0.0)) throw DomainError("fit_surface: psi0 must be positive");
    obs.push_back({{s.alpha, s.psi0}, s.ln_r1, 1.0});
    if (!(s.std_error > 0.0)) all_have_stderr = false;
  }
  require_samples(obs.size(), 7, "fit_surface");
  const auto distinct = [&](int dim) {
    return std::any_of(obs.begin(), obs.end(),
                       [&](const Observation& o) { return o.x[dim] != obs.front().x[dim]; });
  };
  if (!distinct(0) || !distinct(1)) {
    throw InvalidParameter("fit_surface: samples must span both alpha and psi0");
  }
  if (all_have_stderr) {
    std::size_t k = 0;
    for (const auto& s : samples) {
      if (!std::isfinite(s.ln_r1)) continue;
      const double se = std::max(s.std_error, options.stderr_floor);
      obs[k++].weight = 1.0 / (se * se);
    }
  }

  const Model model = [](const std::array<double, 2>& x, std::span<const double> p) {
    return p[0] * surface_shape(x[0], x[1], p[1], p[2], p[3], p[4]) + p[5];
  };
  // Order: A, B_psi, B_alpha, gamma, delta, c.
  const Bounds bounds{{-kInf, 1e-3, 1e-3, 0.0, -10.0, -kInf}, {kInf, 10.0, 60.0, 10.0, 10.0, kInf}};

  // Latin hypercube over the non-linear parameters.
  struct Range {
    double lo, hi;
    bool log;
  };
  const std::array<Range, 4> ranges{{{0.45, 1.35, false},   // B_psi
                                     {1.0, 15.0, true},     // B_alpha
                                     {0.5, 1.5, false},     // gamma
                                     {-0.8, 0.0, false}}};  // delta
  const std::size_t n_starts = std::max<std::size_t>(1, options.starts);
  Rng rng(options.seed);
  std::array<std::vector<double>, 4> lhs;
  for (std::size_t d = 0; d < 4; ++d) {
    std::vector<std::size_t> perm(n_starts);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n_starts; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    for (std::size_t i = 0; i < n_starts; ++i) {
      const double u = (static_cast<double>(perm[i]) + rng.uniform01()) / static_cast<double>(n_starts);
      const auto& r = ranges[d];
      lhs[d].push_back(r.log ? r.lo * std::pow(r.hi / r.lo, u) : r.lo + u * (r.hi - r.lo));
    }
  }

  SurfaceFit best;
  double best_cost = kInf;
  for (std::size_t s = 0; s < n_starts; ++s) {
    const double bp = lhs[0][s], ba = lhs[1][s], g = lhs[2][s], dl = lhs[3][s];
    // A and c enter linearly: solve them for this shape.
    std::vector<double> gx, ys, ws;
    for (const auto& o : obs) {
      gx.push_back(surface_shape(o.x[0], o.x[1], bp, ba, g, dl));
      ys.push_back(o.y);
      ws.push_back(o.weight);
    }
    if (!std::all_of(gx.begin(), gx.end(), [](double v) { return std::isfinite(v); })) continue;
    const auto [c0, a0] = linear_ls(gx, ys, ws);
    const std::vector<double> init{a0 == 0.0 ? -1e-3 : a0, bp, ba, g, dl, c0};

    LmResult res;
    try {
      res = lm_fit(model, obs, init, bounds);
    } catch (const RankDeficiency&) {
      continue;
    } catch (const DomainError&) {
      continue;
    }
    if (!std::isfinite(res.cost)) continue;
    if (res.cost < best_cost) {
      best_cost = res.cost;
      best = {res.params[0], res.params[1], res.params[2], res.params[3], res.params[4],
              res.params[5], res.goodness, res.converged, static_cast<int>(s)};
    }
  }
  if (best.best_start < 0) throw RankDeficiency("fit_surface: no start produced a usable fit");
  return best;
}

double predict_ln_r1(const SurfaceFit& fit, double alpha, double psi0) {
  if (!(psi0 > 0.0)) throw DomainError("predict_ln_r1: psi0 must be positive");
  return fit.big_a * surface_shape(alpha, psi0, fit.b_psi, fit.b_alpha, fit.gamma_alpha,
                                   fit.delta_alpha) +
         fit.c;
}

}  // namespace tonsim::fitting
