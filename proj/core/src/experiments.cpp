#include "tonsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#include "tonsim/cost.hpp"
#include "tonsim/error.hpp"
#include "tonsim/parallel.hpp"
#include "tonsim/rng.hpp"
#include "tonsim/simulation.hpp"

namespace tonsim::experiments {

std::string_view to_string(SearchFlag flag) {
  switch (flag) {
    case SearchFlag::None:
      return "none";
    case SearchFlag::TrueAtFloor:
      return "true_at_floor";
    case SearchFlag::NeverTrue:
      return "never_true";
  }
  return "unknown";
}

namespace {

TonConfig run_config(const TonConfig& base, double rate, const Ensemble& ensemble, std::size_t i) {
  TonConfig c = base;
  c.injection_rate = rate;
  c.seed = derive_run_seed(ensemble.base_seed, ensemble.first_index + i);
  return c;
}

TonConfig without_faults(TonConfig c) {
  c.fault_mean_delay.reset();
  return c;
}

void require_ensemble(const Ensemble& e) {
  if (e.seeds == 0) throw InvalidParameter("ensemble must have at least one seed");
  validate(e.choke);
}

double resolve_floor(const TonConfig& c, const SearchOptions& s) {
  return s.floor_rate > 0.0 ? s.floor_rate : 4.0 / c.sim_duration;
}

// Geometric bracket-and-bisect on a predicate assumed monotone in the rate.
template <class Predicate>
ThresholdResult search_rate(Predicate&& predicate, double floor, double ceiling, double guess,
                            double rel_res) {
  if (!(rel_res > 0.0)) throw InvalidParameter("search resolution must be > 0");
  if (!(floor > 0.0 && ceiling > floor)) throw InvalidParameter("search needs 0 < floor < ceiling");

  ThresholdResult out;
  auto probe = [&](double r) {
    ++out.probes;
    return predicate(r);
  };
  auto true_at_floor = [&] {
    out.flag = SearchFlag::TrueAtFloor;
    out.rate = 0.0;
    out.lower = 0.0;
    out.upper = floor;
    return out;
  };
  auto never_true = [&] {
    out.flag = SearchFlag::NeverTrue;
    out.rate = ceiling;
    out.lower = ceiling;
    out.upper = ceiling;
    return out;
  };

  guess = std::clamp(guess, floor, ceiling);
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0 + 4.0 * rel_res;
  if (probe(guess)) {
    hi = guess;
    for (;;) {
      if (hi <= floor) return true_at_floor();
      const double candidate = hi / step;
      if (candidate <= floor) {
        if (probe(floor)) return true_at_floor();
        lo = floor;
        break;
      }
      if (!probe(candidate)) {
        lo = candidate;
        break;
      }
      hi = candidate;
      step *= step;
    }
  } else {
    lo = guess;
    for (;;) {
      if (lo >= ceiling) return never_true();
      const double candidate = lo * step;
      if (candidate >= ceiling) {
        if (!probe(ceiling)) return never_true();
        hi = ceiling;
        break;
      }
      if (probe(candidate)) {
        hi = candidate;
        break;
      }
      lo = candidate;
      step *= step;
    }
  }

  while (hi > lo * (1.0 + rel_res)) {
    const double mid = std::sqrt(lo * hi);
    if (probe(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.rate = hi;
  out.lower = lo;
  out.upper = hi;
  return out;
}

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

}  // namespace

bool abort_predicate(const TonConfig& config, double rate, const Ensemble& ensemble) {
  require_ensemble(ensemble);
  const TonConfig base = without_faults(config);
  const std::size_t n = ensemble.seeds;

  std::uint64_t injected = 0;
  for (std::size_t i = 0; i < n; ++i) injected += count_arrivals(run_config(base, rate, ensemble, i));
  if (injected == 0) return false;
  const auto needed = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil(1.0e-6 * static_cast<double>(injected))));

  if (ensemble.jobs == 1 || n == 1) {
    std::uint64_t pooled = 0;
    for (std::size_t i = 0; i < n && pooled < needed; ++i) {
      RunOptions opt{ensemble.choke, StopRule::OnAbortCount, needed - pooled};
      pooled += run_simulation(run_config(base, rate, ensemble, i), opt).aborted;
    }
    return pooled >= needed;
  }

  std::vector<std::uint64_t> aborted(n, 0);
  std::atomic<bool> decided{false};
  run_indexed(ensemble.jobs, n, [&](std::size_t i) {
    RunOptions opt{ensemble.choke, StopRule::OnAbortCount, needed};
    aborted[i] = run_simulation(run_config(base, rate, ensemble, i), opt).aborted;
    if (aborted[i] >= needed) decided = true;
  }, &decided);
  std::uint64_t pooled = 0;
  for (auto a : aborted) pooled += a;
  return pooled >= needed;
}

bool choke_predicate(const TonConfig& config, double rate, const Ensemble& ensemble) {
  require_ensemble(ensemble);
  const TonConfig base = without_faults(config);
  const std::size_t n = ensemble.seeds;
  const std::size_t majority = n / 2 + 1;
  const RunOptions opt{ensemble.choke, StopRule::OnChoke, 1};

  if (ensemble.jobs == 1 || n == 1) {
    std::size_t chokes = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (run_simulation(run_config(base, rate, ensemble, i), opt).choke_time) ++chokes;
      const std::size_t clean = i + 1 - chokes;
      if (chokes >= majority || n - clean < majority) break;
    }
    return chokes >= majority;
  }

  std::atomic<std::size_t> chokes{0};
  std::atomic<std::size_t> clean{0};
  std::atomic<bool> decided{false};
  run_indexed(ensemble.jobs, n, [&](std::size_t i) {
    if (run_simulation(run_config(base, rate, ensemble, i), opt).choke_time) {
      if (++chokes >= majority) decided = true;
    } else if (n - ++clean < majority) {
      decided = true;
    }
  }, &decided);
  return chokes.load() >= majority;
}

double mean_field_rate(const TonConfig& config) {
  const double per_txn = total_txn_cost(config.psi0, config.alpha, config.txn_length);
  if (!(per_txn > 0.0)) return std::numeric_limits<double>::infinity();
  return config.capacity * config.n_nodes / (config.decay_time * per_txn);
}

ThresholdResult find_r0(const TonConfig& config, const Ensemble& ensemble,
                        const SearchOptions& search) {
  validate(config);
  const double guess = search.initial_guess > 0.0 ? search.initial_guess
                                                  : 0.2 * mean_field_rate(config);
  return search_rate([&](double r) { return abort_predicate(config, r, ensemble); },
                     resolve_floor(config, search), search.ceiling_rate, guess,
                     search.rel_resolution);
}

ThresholdResult find_r1(const TonConfig& config, const Ensemble& ensemble,
                        const SearchOptions& search) {
  validate(config);
  const double guess = search.initial_guess > 0.0 ? search.initial_guess
                                                  : 0.35 * mean_field_rate(config);
  return search_rate([&](double r) { return choke_predicate(config, r, ensemble); },
                     resolve_floor(config, search), search.ceiling_rate, guess,
                     search.rel_resolution);
}

M0Result find_m0(const TonConfig& config, double r0, const Ensemble& ensemble) {
  require_ensemble(ensemble);
  if (!config.fault_mean_delay) throw InvalidParameter("find_m0 needs fault_mean_delay");
  TonConfig base = config;
  base.injection_rate = r0;
  validate(base);

  const std::size_t n = ensemble.seeds;
  std::vector<std::optional<double>> fractions(n);
  const RunOptions opt{ensemble.choke, StopRule::OnChoke, 1};
  run_indexed(ensemble.jobs, n, [&](std::size_t i) {
    fractions[i] = run_simulation(run_config(base, r0, ensemble, i), opt).fault_fraction_at_choke;
  });

  M0Result out;
  out.runs = n;
  std::vector<double> choked;
  for (const auto& f : fractions) {
    if (f) choked.push_back(*f);
  }
  out.choked_runs = choked.size();
  if (!choked.empty()) {
    out.m0 = mean(choked);
    out.std_error = standard_error(choked);
  }
  return out;
}

ResilienceProfile resilience_profile(const TonConfig& config, const Ensemble& ensemble,
                                     const SearchOptions& search) {
  const ThresholdResult r1 = find_r1(config, ensemble, search);
  SearchOptions r0_search = search;
  if (r0_search.initial_guess <= 0.0 && r1.rate > 0.0) r0_search.initial_guess = 0.5 * r1.rate;
  const ThresholdResult r0 = find_r0(config, ensemble, r0_search);

  ResilienceProfile p;
  p.r0 = r0.rate;
  p.r1 = r1.rate;
  p.r0_flag = r0.flag;
  p.r1_flag = r1.flag;
  p.seeds_used = ensemble.seeds;
  p.r0_resolution = r0.upper - r0.lower;
  p.r1_resolution = r1.upper - r1.lower;
  if (p.r0 > p.r1) {
    p.r0 = p.r1;
    p.r0_clamped = true;
  }
  p.rho0 = p.r1 > 0.0 ? p.r0 / p.r1 : 0.0;
  if (config.fault_mean_delay && p.r0 > 0.0) p.m0 = find_m0(config, p.r0, ensemble).m0;
  return p;
}

bool behaviorally_equivalent(const ResilienceProfile& p, const ResilienceProfile& q,
                             double rel_tol, EquivalenceFields fields) {
  auto close = [rel_tol](double x, double y) {
    const double scale = std::max(std::abs(x), std::abs(y));
    return scale == 0.0 || std::abs(x - y) / scale <= rel_tol;
  };
  if (fields.r0 && !close(p.r0, q.r0)) return false;
  if (fields.r1 && !close(p.r1, q.r1)) return false;
  if (fields.m0 && p.m0 && q.m0 && !close(*p.m0, *q.m0)) return false;
  return true;
}

std::vector<GridSample> grid_sweep(const TonConfig& config_template,
                                   std::span<const double> alpha_grid,
                                   std::span<const double> psi0_grid, const Ensemble& ensemble,
                                   const GridOptions& options) {
  if (alpha_grid.empty() || psi0_grid.empty()) throw InvalidParameter("grid_sweep: empty grid");
  for (double a : alpha_grid) {
    if (!(a > 0.0)) throw InvalidParameter("grid_sweep: alpha values must be > 0");
  }
  for (double p : psi0_grid) {
    if (!(p > 0.0)) throw InvalidParameter("grid_sweep: psi0 values must be > 0");
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<GridSample> out;
  out.reserve(alpha_grid.size() * psi0_grid.size());
  for (double alpha : alpha_grid) {
    for (double psi0 : psi0_grid) {
      TonConfig c = config_template;
      c.alpha = alpha;
      c.psi0 = psi0;

      const ThresholdResult r1 = find_r1(c, ensemble, options.search);
      GridSample s;
      s.alpha = alpha;
      s.psi0 = psi0;
      s.ln_r1 = std::log(r1.rate);
      s.r1_flag = r1.flag;
      s.ln_r0 = nan;
      if (options.measure_r0) {
        SearchOptions r0_search = options.search;
        if (r1.rate > 0.0) r0_search.initial_guess = 0.5 * r1.rate;
        const ThresholdResult r0 = find_r0(c, ensemble, r0_search);
        if (r0.rate > 0.0) s.ln_r0 = std::log(r0.rate);
      }
      if (options.per_seed_stderr && ensemble.seeds > 1) {
        SearchOptions single = options.search;
        if (r1.rate > 0.0) single.initial_guess = r1.rate;
        std::vector<double> logs;
        for (std::size_t i = 0; i < ensemble.seeds; ++i) {
          Ensemble one = ensemble;
          one.seeds = 1;
          one.first_index = ensemble.first_index + i;
          const double r = find_r1(c, one, single).rate;
          if (r > 0.0) logs.push_back(std::log(r));
        }
        s.std_error = standard_error(logs);
      }
      out.push_back(s);
    }
  }
  return out;
}

std::vector<CapacitySample> capacity_sweep(const TonConfig& config_template,
                                           std::span<const double> capacity_grid,
                                           const Ensemble& ensemble,
                                           const SearchOptions& search) {
  if (capacity_grid.empty()) throw InvalidParameter("capacity_sweep: empty grid");
  std::vector<CapacitySample> out;
  out.reserve(capacity_grid.size());
  for (double capacity : capacity_grid) {
    TonConfig c = config_template;
    c.capacity = capacity;
    out.push_back({capacity, resilience_profile(c, ensemble, search)});
  }
  return out;
}

}  // namespace tonsim::experiments
