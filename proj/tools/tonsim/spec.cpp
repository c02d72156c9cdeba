#include "spec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "tonsim/error.hpp"

namespace tonsim::cli {

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Profile: return "profile";
    case Command::SweepGrid: return "sweep-grid";
    case Command::SweepCapacity: return "sweep-capacity";
    case Command::Fit: return "fit";
    case Command::Flatten: return "flatten";
    case Command::PrimeAlpha: return "prime-alpha";
  }
  return "?";
}

std::string_view to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

std::string_view to_string(FitModel m) {
  switch (m) {
    case FitModel::Surface: return "surface";
    case FitModel::SurfaceR0: return "surface-r0";
    case FitModel::CapacityR0: return "capacity-r0";
    case FitModel::CapacityR1: return "capacity-r1";
    case FitModel::R0R1: return "r0-r1";
    case FitModel::M0: return "m0";
    case FitModel::Delta: return "delta";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  throw InvalidParameter(std::string(key) + ": " + std::string(what) + ", got '" +
                         std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size()) bad_value(key, v, "expected a number");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size()) {
    bad_value(key, v, "expected a non-negative integer");
  }
  return out;
}

std::uint32_t to_u32(std::string_view key, std::string_view v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > 0xffffffffULL) bad_value(key, v, "out of range");
  return static_cast<std::uint32_t>(x);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "expected true or false");
}

std::vector<double> to_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  if (v.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = v.find(',', start);
    out.push_back(to_double(key, trim(v.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <class Enum, std::size_t N>
Enum to_enum(std::string_view key, std::string_view v, const std::array<Enum, N>& all) {
  for (Enum e : all) {
    if (to_string(e) == v) return e;
  }
  std::string allowed;
  for (Enum e : all) allowed += (allowed.empty() ? "" : "|") + std::string(to_string(e));
  bad_value(key, v, "expected one of " + allowed);
}

constexpr std::array<Command, 7> kCommands{Command::Simulate,      Command::Profile,
                                           Command::SweepGrid,     Command::SweepCapacity,
                                           Command::Fit,           Command::Flatten,
                                           Command::PrimeAlpha};
constexpr std::array<FitModel, 7> kFitModels{FitModel::Surface,    FitModel::SurfaceR0,
                                             FitModel::CapacityR0, FitModel::CapacityR1,
                                             FitModel::R0R1,       FitModel::M0,
                                             FitModel::Delta};
constexpr std::array<Format, 2> kFormats{Format::Csv, Format::Json};

struct Field {
  const char* key;
  std::function<void(ExperimentSpec&, std::string_view)> set;
  std::function<std::string(const ExperimentSpec&)> get;
  bool affects_payload = true;
};

#define TONSIM_NUM(name, member)                                                        \
  Field {                                                                               \
    name, [](ExperimentSpec& s, std::string_view v) { s.member = to_double(name, v); }, \
        [](const ExperimentSpec& s) { return fmt(s.member); }                           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      {"command",
       [](ExperimentSpec& s, std::string_view v) { s.command = to_enum("command", v, kCommands); },
       [](const ExperimentSpec& s) { return std::string(to_string(s.command)); }},
      {"n_nodes", [](ExperimentSpec& s, std::string_view v) { s.config.n_nodes = to_u32("n_nodes", v); },
       [](const ExperimentSpec& s) { return std::to_string(s.config.n_nodes); }},
      TONSIM_NUM("density", config.density),
      TONSIM_NUM("capacity", config.capacity),
      {"txn_length",
       [](ExperimentSpec& s, std::string_view v) { s.config.txn_length = to_u32("txn_length", v); },
       [](const ExperimentSpec& s) { return std::to_string(s.config.txn_length); }},
      TONSIM_NUM("subtxn_time", config.subtxn_time),
      TONSIM_NUM("sim_duration", config.sim_duration),
      TONSIM_NUM("decay_time", config.decay_time),
      TONSIM_NUM("psi0", config.psi0),
      TONSIM_NUM("alpha", config.alpha),
      TONSIM_NUM("injection_rate", config.injection_rate),
      {"fault_mean_delay",
       [](ExperimentSpec& s, std::string_view v) {
         if (v == "disabled" || v.empty()) {
           s.config.fault_mean_delay.reset();
         } else {
           s.config.fault_mean_delay = to_double("fault_mean_delay", v);
         }
       },
       [](const ExperimentSpec& s) {
         return s.config.fault_mean_delay ? fmt(*s.config.fault_mean_delay) : std::string("disabled");
       }},
      {"seed", [](ExperimentSpec& s, std::string_view v) { s.config.seed = to_u64("seed", v); },
       [](const ExperimentSpec& s) { return std::to_string(s.config.seed); }},
      {"alpha_grid", [](ExperimentSpec& s, std::string_view v) { s.alpha_grid = to_list("alpha_grid", v); },
       [](const ExperimentSpec& s) { return fmt_list(s.alpha_grid); }},
      {"psi0_grid", [](ExperimentSpec& s, std::string_view v) { s.psi0_grid = to_list("psi0_grid", v); },
       [](const ExperimentSpec& s) { return fmt_list(s.psi0_grid); }},
      {"capacity_grid",
       [](ExperimentSpec& s, std::string_view v) { s.capacity_grid = to_list("capacity_grid", v); },
       [](const ExperimentSpec& s) { return fmt_list(s.capacity_grid); }},
      {"seeds", [](ExperimentSpec& s, std::string_view v) { s.seeds = to_u64("seeds", v); },
       [](const ExperimentSpec& s) { return std::to_string(s.seeds); }},
      {"base_seed", [](ExperimentSpec& s, std::string_view v) { s.base_seed = to_u64("base_seed", v); },
       [](const ExperimentSpec& s) { return std::to_string(s.base_seed); }},
      {"first_index",
       [](ExperimentSpec& s, std::string_view v) { s.first_index = to_u64("first_index", v); },
       [](const ExperimentSpec& s) { return std::to_string(s.first_index); }},
      {"jobs", [](ExperimentSpec& s, std::string_view v) { s.jobs = to_u64("jobs", v); },
       [](const ExperimentSpec& s) { return std::to_string(s.jobs); }, false},
      {"choke_window",
       [](ExperimentSpec& s, std::string_view v) { s.choke_window = to_u64("choke_window", v); },
       [](const ExperimentSpec& s) { return std::to_string(s.choke_window); }},
      TONSIM_NUM("commit_floor", commit_floor),
      TONSIM_NUM("resolution", resolution),
      TONSIM_NUM("ceiling_rate", ceiling_rate),
      {"measure_r0", [](ExperimentSpec& s, std::string_view v) { s.measure_r0 = to_bool("measure_r0", v); },
       [](const ExperimentSpec& s) { return fmt_bool(s.measure_r0); }},
      {"per_seed_stderr",
       [](ExperimentSpec& s, std::string_view v) { s.per_seed_stderr = to_bool("per_seed_stderr", v); },
       [](const ExperimentSpec& s) { return fmt_bool(s.per_seed_stderr); }},
      {"input", [](ExperimentSpec& s, std::string_view v) { s.input = std::string(v); },
       [](const ExperimentSpec& s) { return s.input; }},
      {"fit_model",
       [](ExperimentSpec& s, std::string_view v) { s.fit_model = to_enum("fit_model", v, kFitModels); },
       [](const ExperimentSpec& s) { return std::string(to_string(s.fit_model)); }},
      TONSIM_NUM("alpha_min", alpha_min),
      TONSIM_NUM("alpha_max", alpha_max),
      TONSIM_NUM("tol", tol),
      {"verify", [](ExperimentSpec& s, std::string_view v) { s.verify = to_bool("verify", v); },
       [](const ExperimentSpec& s) { return fmt_bool(s.verify); }},
      TONSIM_NUM("rel_tol", rel_tol),
      TONSIM_NUM("psi0_prime_scale", psi0_prime_scale),
      {"output_path", [](ExperimentSpec& s, std::string_view v) { s.output_path = std::string(v); },
       [](const ExperimentSpec& s) { return s.output_path; }, false},
      {"format", [](ExperimentSpec& s, std::string_view v) { s.format = to_enum("format", v, kFormats); },
       [](const ExperimentSpec& s) { return std::string(to_string(s.format)); }, false},
  };
  return table;
}

#undef TONSIM_NUM

std::string emit_fields(const ExperimentSpec& spec, bool payload_only) {
  std::string out;
  for (const Field& f : fields()) {
    if (payload_only && !f.affects_payload) continue;
    out += f.key;
    out += " = ";
    out += f.get(spec);
    out += '\n';
  }
  return out;
}

}  // namespace

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw InvalidParameter("expected key=value, got '" + std::string(text) + "'");
  }
  return {std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1)))};
}

void set_key(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(spec, trim(value));
      return;
    }
  }
  throw InvalidParameter("unknown key '" + std::string(key) + "'");
}

ExperimentSpec parse_spec(std::string_view text, const Overrides& overrides,
                          std::string_view origin) {
  ExperimentSpec spec;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    const auto where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw InvalidParameter(where + "expected key = value");
    try {
      set_key(spec, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const InvalidParameter& e) {
      throw InvalidParameter(where + e.what());
    }
  }
  for (const auto& [k, v] : overrides) set_key(spec, k, v);
  validate(spec);
  return spec;
}

ExperimentSpec load_spec(const std::string& path, const Overrides& overrides) {
  if (path.empty()) return parse_spec("", overrides);
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open spec file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_spec(text.str(), overrides, path);
}

std::string emit_spec(const ExperimentSpec& spec) { return emit_fields(spec, false); }

void validate(const ExperimentSpec& s) {
  tonsim::validate(s.config);
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw InvalidParameter(std::string(field) + ": " + what);
  };
  require(s.seeds >= 1, "seeds", "must be >= 1");
  require(s.choke_window >= 1, "choke_window", "must be >= 1");
  require(s.commit_floor >= 0.0 && s.commit_floor < 1.0, "commit_floor", "must lie in [0, 1)");
  require(s.resolution > 0.0, "resolution", "must be > 0");
  require(s.ceiling_rate > 0.0, "ceiling_rate", "must be > 0");
  require(s.rel_tol >= 0.0, "rel_tol", "must be >= 0");
  require(s.tol > 0.0, "tol", "must be > 0");
  require(s.psi0_prime_scale > 0.0, "psi0_prime_scale", "must be > 0");
  require(s.alpha_min > 0.0 && s.alpha_max > s.alpha_min, "alpha_min",
          "need 0 < alpha_min < alpha_max");
  for (double a : s.alpha_grid) require(a > 0.0, "alpha_grid", "values must be > 0");
  for (double p : s.psi0_grid) require(p > 0.0, "psi0_grid", "values must be > 0");
  for (double c : s.capacity_grid) require(c > 0.0, "capacity_grid", "values must be > 0");

  switch (s.command) {
    case Command::Simulate:
    case Command::Profile:
      break;
    case Command::SweepGrid:
      require(!s.alpha_grid.empty(), "alpha_grid", "required by sweep-grid");
      require(!s.psi0_grid.empty(), "psi0_grid", "required by sweep-grid");
      break;
    case Command::SweepCapacity:
      require(!s.capacity_grid.empty(), "capacity_grid", "required by sweep-capacity");
      break;
    case Command::Fit:
      require(!s.input.empty(), "input", "required by fit");
      break;
    case Command::Flatten:
      require(!s.input.empty(), "input", "required by flatten (a surface fit)");
      if (!s.verify) {
        require(!s.alpha_grid.empty(), "alpha_grid", "required by flatten");
        require(!s.psi0_grid.empty(), "psi0_grid", "required by flatten");
      }
      break;
    case Command::PrimeAlpha:
      require(!s.input.empty(), "input", "required by prime-alpha (surface fits)");
      break;
  }
}

std::string config_digest(const ExperimentSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : emit_fields(spec, true)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tonsim::cli
