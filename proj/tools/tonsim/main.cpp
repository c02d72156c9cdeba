#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "tonsim/error.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> base_seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::size_t> jobs;
  std::optional<std::string> input;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace tonsim::cli;

  CLI::App app{"tonsim: transaction-oriented network simulator"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  Flags flags;
  const std::vector<std::pair<const char*, const char*>> commands{
      {"simulate", "Run single simulations, one record per seed"},
      {"profile", "Measure r0, r1, rho0 (and m0 with faults) for one config"},
      {"sweep-grid", "ln r1 over an alpha x psi0 grid"},
      {"sweep-capacity", "Resilience profile for each capacity"},
      {"fit", "Fit one of the empirical laws to a previous output"},
      {"flatten", "Flat-cost equivalents from a surface fit"},
      {"prime-alpha", "Peak of the flattening ratio for each surface fit"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "Spec file (key = value lines)");
    sub->add_option("--set", flags.sets, "Override one key, key=value (repeatable)");
    sub->add_option("--seeds", flags.seeds, "Ensemble size");
    sub->add_option("--base-seed", flags.base_seed, "Base seed for per-run seed derivation");
    sub->add_option("--out", flags.out, "Output path (stdout if omitted)");
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", flags.jobs, "Worker threads (default: TONSIM_JOBS or all cores)");
    sub->add_option("--input", flags.input, "Input table for fit, flatten and prime-alpha");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Overrides overrides;
    overrides.emplace_back("command", app.get_subcommands().front()->get_name());
    for (const auto& s : flags.sets) overrides.push_back(parse_override(s));
    if (flags.seeds) overrides.emplace_back("seeds", std::to_string(*flags.seeds));
    if (flags.base_seed) overrides.emplace_back("base_seed", std::to_string(*flags.base_seed));
    if (flags.out) overrides.emplace_back("output_path", *flags.out);
    if (flags.format) overrides.emplace_back("format", *flags.format);
    if (flags.jobs) overrides.emplace_back("jobs", std::to_string(*flags.jobs));
    if (flags.input) overrides.emplace_back("input", *flags.input);
    return execute(load_spec(flags.config, overrides));
  } catch (const tonsim::Error& e) {
    std::cerr << "tonsim: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "tonsim: internal error: " << e.what() << '\n';
    return 1;
  }
}
