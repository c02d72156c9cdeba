#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tonsim/config.hpp"

namespace tonsim::cli {

enum class Command : std::uint8_t {
  Simulate,
  Profile,
  SweepGrid,
  SweepCapacity,
  Fit,
  Flatten,
  PrimeAlpha,
};

enum class Format : std::uint8_t { Csv, Json };

/// Which law `fit` fits, and which columns of the input it reads.
enum class FitModel : std::uint8_t {
  Surface,     // alpha, psi0, ln_r1 [, stderr]
  SurfaceR0,   // alpha, psi0, ln_r0 [, stderr]
  CapacityR0,  // capacity, r0
  CapacityR1,  // capacity, r1
  R0R1,        // r1, r0
  M0,          // rho0, m0
  Delta,       // rho0, m0
};

std::string_view to_string(Command c);
std::string_view to_string(Format f);
std::string_view to_string(FitModel m);

/// Everything one invocation needs. Text form: one `key = value` per line,
/// `#` starts a comment, lists are comma separated.
struct ExperimentSpec {
  Command command = Command::Profile;
  TonConfig config;

  std::vector<double> alpha_grid;
  std::vector<double> psi0_grid;
  std::vector<double> capacity_grid;

  std::size_t seeds = 8;
  std::uint64_t base_seed = 0;
  std::uint64_t first_index = 0;
  /// 0: TONSIM_JOBS, else hardware concurrency. Never affects output.
  std::size_t jobs = 0;

  std::size_t choke_window = 1000;
  double commit_floor = 0.01;
  double resolution = 0.01;
  double ceiling_rate = 1.0e4;
  bool measure_r0 = false;
  bool per_seed_stderr = true;

  std::string input;
  FitModel fit_model = FitModel::Surface;

  double alpha_min = 0.5;
  double alpha_max = 1.5;
  double tol = 1e-6;
  bool verify = false;
  double rel_tol = 0.15;
  double psi0_prime_scale = 1.0;

  std::string output_path;
  Format format = Format::Csv;

  bool operator==(const ExperimentSpec&) const = default;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Splits "key=value". Throws InvalidParameter if there is no '='.
std::pair<std::string, std::string> parse_override(std::string_view text);

/// Parses spec text on top of the defaults, then applies overrides in order.
/// Errors name the line number (text) or the key (overrides); unknown keys
/// are errors. The result is validated.
ExperimentSpec parse_spec(std::string_view text, const Overrides& overrides = {},
                          std::string_view origin = "<spec>");

/// Reads the file at `path` (empty path means no file) and parses it.
ExperimentSpec load_spec(const std::string& path, const Overrides& overrides = {});

/// Applies one key. Throws InvalidParameter for unknown keys or bad values.
void set_key(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Canonical text form; parse_spec(emit_spec(s)) == s.
std::string emit_spec(const ExperimentSpec& spec);

/// Command-specific checks plus TonConfig validation.
void validate(const ExperimentSpec& spec);

/// FNV-1a 64 over the canonical text of everything that determines the
/// payload (jobs, output path and format excluded), as 16 hex digits.
std::string config_digest(const ExperimentSpec& spec);

}  // namespace tonsim::cli
