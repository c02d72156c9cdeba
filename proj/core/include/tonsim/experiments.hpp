#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tonsim/choke.hpp"
#include "tonsim/config.hpp"

namespace tonsim::experiments {

/// Which seeds make up an ensemble and how to run it. Run i of the ensemble
/// uses seed derive_run_seed(base_seed, first_index + i); every probe of a
/// search reuses the same seeds, so the graph of run i is the same at every rate.
struct Ensemble {
  std::size_t seeds = 8;
  std::uint64_t base_seed = 0;
  std::uint64_t first_index = 0;
  /// 0 means default_jobs().
  std::size_t jobs = 1;
  ChokeCriterion choke;
};

/// Rate search bounds. Probes never go below floor_rate or above ceiling_rate.
struct SearchOptions {
  double rel_resolution = 0.01;
  /// 0 selects 4 / sim_duration, i.e. a handful of injections per run.
  double floor_rate = 0.0;
  double ceiling_rate = 1.0e4;
  /// Starting point of the bracket; 0 selects a mean-field estimate.
  double initial_guess = 0.0;
};

enum class SearchFlag : std::uint8_t {
  None,
  /// Predicate already true at the floor rate; the reported rate is 0.
  TrueAtFloor,
  /// Predicate false even at the ceiling; the reported rate is the ceiling.
  NeverTrue,
};

std::string_view to_string(SearchFlag flag);

struct ThresholdResult {
  /// Smallest probed rate at which the predicate held (within resolution).
  double rate = 0.0;
  /// Largest probed rate at which the predicate failed (0 if none).
  double lower = 0.0;
  double upper = 0.0;
  SearchFlag flag = SearchFlag::None;
  std::size_t probes = 0;
};

/// Pooled abort fraction across the ensemble is at least
/// max(1e-6, 1 / pooled injections). False when nothing is injected.
bool abort_predicate(const TonConfig& config, double rate, const Ensemble& ensemble);

/// More than half of the ensemble runs choke within sim_duration.
bool choke_predicate(const TonConfig& config, double rate, const Ensemble& ensemble);

/// Mean-field rate at which the average decayed cost reaches capacity:
/// C * N / (H * total_txn_cost). Used only to seed the bracket.
double mean_field_rate(const TonConfig& config);

/// First-abort threshold r0. Faults in `config` are ignored.
ThresholdResult find_r0(const TonConfig& config, const Ensemble& ensemble,
                        const SearchOptions& search = {});

/// Choke threshold r1. Faults in `config` are ignored.
ThresholdResult find_r1(const TonConfig& config, const Ensemble& ensemble,
                        const SearchOptions& search = {});

struct M0Result {
  /// Mean fraction of fault-disabled nodes at choke onset over the runs that
  /// choked; empty if none did.
  std::optional<double> m0;
  double std_error = 0.0;
  std::size_t choked_runs = 0;
  std::size_t runs = 0;
};

/// Runs the ensemble at fixed rate r0 with internal faults enabled.
/// Throws InvalidParameter if `config` has faults disabled.
M0Result find_m0(const TonConfig& config, double r0, const Ensemble& ensemble);

struct ResilienceProfile {
  double r0 = 0.0;
  double r1 = 0.0;
  double rho0 = 0.0;
  std::optional<double> m0;
  std::size_t seeds_used = 0;
  double r0_resolution = 0.0;
  double r1_resolution = 0.0;
  SearchFlag r0_flag = SearchFlag::None;
  SearchFlag r1_flag = SearchFlag::None;
  /// Set when the measured r0 exceeded r1 and was clamped down to r1.
  bool r0_clamped = false;
};

/// r0, r1 and rho0 = r0 / r1 from fault-free runs; m0 as well when the
/// config has faults enabled.
ResilienceProfile resilience_profile(const TonConfig& config, const Ensemble& ensemble,
                                     const SearchOptions& search = {});

struct EquivalenceFields {
  bool r0 = true;
  bool r1 = true;
  bool m0 = true;
};

/// Relative differences |x - y| / max(|x|, |y|) of r0, r1 (and m0 when both
/// profiles have it) are all within rel_tol.
bool behaviorally_equivalent(const ResilienceProfile& p, const ResilienceProfile& q,
                             double rel_tol, EquivalenceFields fields = {});

struct GridSample {
  double alpha = 0.0;
  double psi0 = 0.0;
  double ln_r1 = 0.0;
  /// NaN unless r0 was measured and positive.
  double ln_r0 = 0.0;
  /// Standard error of ln r1 from per-seed thresholds.
  double std_error = 0.0;
  SearchFlag r1_flag = SearchFlag::None;
};

struct GridOptions {
  bool measure_r0 = false;
  /// Per-seed thresholds for the standard error. Off gives stderr = 0.
  bool per_seed_stderr = true;
  SearchOptions search;
};

/// Row-major over (alpha, psi0): alpha is the outer loop.
std::vector<GridSample> grid_sweep(const TonConfig& config_template,
                                   std::span<const double> alpha_grid,
                                   std::span<const double> psi0_grid, const Ensemble& ensemble,
                                   const GridOptions& options = {});

struct CapacitySample {
  double capacity = 0.0;
  ResilienceProfile profile;
};

/// resilience_profile for each capacity value, in order.
std::vector<CapacitySample> capacity_sweep(const TonConfig& config_template,
                                           std::span<const double> capacity_grid,
                                           const Ensemble& ensemble,
                                           const SearchOptions& search = {});

}  // namespace tonsim::experiments
