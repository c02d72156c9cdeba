#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "tonsim/error.hpp"
#include "tonsim/experiments.hpp"
#include "tonsim/fitting.hpp"
#include "tonsim/flatten.hpp"
#include "tonsim/parallel.hpp"
#include "tonsim/rng.hpp"
#include "tonsim/simulation.hpp"

#ifndef TONSIM_VERSION
#define TONSIM_VERSION "0.0.0"
#endif

namespace tonsim::cli {

std::string_view tool_version() { return TONSIM_VERSION; }

namespace {

using experiments::SearchFlag;

experiments::Ensemble ensemble_of(const ExperimentSpec& s) {
  experiments::Ensemble e;
  e.seeds = s.seeds;
  e.base_seed = s.base_seed;
  e.first_index = s.first_index;
  e.jobs = s.jobs;
  e.choke = ChokeCriterion{s.choke_window, s.commit_floor};
  return e;
}

experiments::SearchOptions search_of(const ExperimentSpec& s) {
  experiments::SearchOptions o;
  o.rel_resolution = s.resolution;
  o.ceiling_rate = s.ceiling_rate;
  return o;
}

const std::vector<std::string> kProfileColumns{"r0",           "r1",         "rho0",
                                               "m0",           "seeds_used", "r0_resolution",
                                               "r1_resolution", "r0_flag",   "r1_flag",
                                               "r0_clamped"};

void append_profile(std::vector<Value>& row, const experiments::ResilienceProfile& p) {
  row.insert(row.end(), {p.r0, p.r1, p.rho0, opt(p.m0), std::uint64_t{p.seeds_used},
                         p.r0_resolution, p.r1_resolution, std::string(to_string(p.r0_flag)),
                         std::string(to_string(p.r1_flag)), p.r0_clamped});
}

Table simulate(const ExperimentSpec& s, bool&) {
  Table t;
  t.columns = {"run_index", "seed", "injection_rate", "injected", "committed", "aborted",
               "in_flight", "aborted_all_neighbors_disabled", "aborted_host_died",
               "nodes_disabled_overload", "nodes_disabled_fault", "choke_time",
               "disabled_fraction_at_choke", "fault_fraction_at_choke", "end_time"};
  std::vector<RunStats> stats(s.seeds);
  std::vector<std::uint64_t> seeds(s.seeds);
  const RunOptions options{ChokeCriterion{s.choke_window, s.commit_floor}, StopRule::Never, 1};
  run_indexed(s.jobs, s.seeds, [&](std::size_t i) {
    TonConfig c = s.config;
    c.seed = seeds[i] = derive_run_seed(s.base_seed, s.first_index + i);
    stats[i] = run_simulation(c, options);
  });
  for (std::size_t i = 0; i < s.seeds; ++i) {
    const RunStats& r = stats[i];
    t.rows.push_back({std::uint64_t{s.first_index + i}, seeds[i], s.config.injection_rate,
                      r.injected, r.committed, r.aborted, r.in_flight,
                      r.aborted_all_neighbors_disabled, r.aborted_host_died,
                      r.nodes_disabled_overload, r.nodes_disabled_fault, opt(r.choke_time),
                      opt(r.disabled_fraction_at_choke), opt(r.fault_fraction_at_choke),
                      r.end_time});
  }
  return t;
}

Table profile(const ExperimentSpec& s, bool& all_flagged) {
  Table t;
  t.columns = kProfileColumns;
  const auto p = experiments::resilience_profile(s.config, ensemble_of(s), search_of(s));
  std::vector<Value> row;
  append_profile(row, p);
  t.rows.push_back(std::move(row));
  all_flagged = p.r1_flag != SearchFlag::None;
  return t;
}

Table sweep_grid(const ExperimentSpec& s, bool& all_flagged) {
  Table t;
  t.columns = {"alpha", "psi0", "ln_r1", "ln_r0", "stderr"};
  experiments::GridOptions go;
  go.measure_r0 = s.measure_r0;
  go.per_seed_stderr = s.per_seed_stderr;
  go.search = search_of(s);
  const auto grid = experiments::grid_sweep(s.config, s.alpha_grid, s.psi0_grid, ensemble_of(s), go);
  all_flagged = true;
  for (const auto& g : grid) {
    t.rows.push_back({g.alpha, g.psi0, g.ln_r1, g.ln_r0, g.std_error});
    if (g.r1_flag == SearchFlag::None) all_flagged = false;
  }
  return t;
}

Table sweep_capacity(const ExperimentSpec& s, bool& all_flagged) {
  Table t;
  t.columns = {"capacity"};
  t.columns.insert(t.columns.end(), kProfileColumns.begin(), kProfileColumns.end());
  const auto sweep = experiments::capacity_sweep(s.config, s.capacity_grid, ensemble_of(s), search_of(s));
  all_flagged = true;
  for (const auto& c : sweep) {
    std::vector<Value> row{c.capacity};
    append_profile(row, c.profile);
    t.rows.push_back(std::move(row));
    if (c.profile.r1_flag == SearchFlag::None) all_flagged = false;
  }
  return t;
}

std::vector<std::pair<double, double>> read_pairs(const TextTable& in, const std::string& x,
                                                  const std::string& y) {
  const std::size_t cx = in.column(x);
  const std::size_t cy = in.column(y);
  std::vector<std::pair<double, double>> out;
  for (std::size_t r = 0; r < in.rows.size(); ++r) {
    const double a = cell_number(in, r, cx);
    const double b = cell_number(in, r, cy);
    // Rows without a measurement (e.g. m0 when no run choked) are skipped.
    if (std::isnan(a) || std::isnan(b)) continue;
    out.emplace_back(a, b);
  }
  return out;
}

const std::vector<std::string> kSurfaceColumns{"txn_length", "A", "B_psi", "B_alpha", "gamma_alpha",
                                               "delta_alpha", "c", "goodness", "goodness_label",
                                               "converged"};

Table fit(const ExperimentSpec& s, bool&) {
  const TextTable in = read_table(s.input);
  Table t;
  switch (s.fit_model) {
    case FitModel::Surface:
    case FitModel::SurfaceR0: {
      const std::string target = s.fit_model == FitModel::Surface ? "ln_r1" : "ln_r0";
      const std::size_t ca = in.column("alpha");
      const std::size_t cp = in.column("psi0");
      const std::size_t cy = in.column(target);
      const auto cs = in.find_column("stderr");
      std::vector<experiments::GridSample> samples;
      for (std::size_t r = 0; r < in.rows.size(); ++r) {
        experiments::GridSample g;
        g.alpha = cell_number(in, r, ca);
        g.psi0 = cell_number(in, r, cp);
        g.ln_r1 = cell_number(in, r, cy);
        g.std_error = cs ? cell_number(in, r, *cs) : 0.0;
        if (std::isnan(g.std_error)) g.std_error = 0.0;
        samples.push_back(g);
      }
      const auto f = fitting::fit_surface(samples);
      t.columns = kSurfaceColumns;
      t.rows.push_back({std::uint64_t{s.config.txn_length}, f.big_a, f.b_psi, f.b_alpha,
                        f.gamma_alpha, f.delta_alpha, f.c, f.goodness, std::string("R2"),
                        f.converged});
      break;
    }
    case FitModel::CapacityR0:
    case FitModel::CapacityR1: {
      const std::string rate = s.fit_model == FitModel::CapacityR0 ? "r0" : "r1";
      const auto f = fitting::fit_capacity_law(read_pairs(in, "capacity", rate));
      t.columns = {"model", "a_coef", "beta", "goodness", "goodness_label", "converged"};
      t.rows.push_back({std::string(to_string(s.fit_model)), f.a_coef, f.beta, f.goodness,
                        std::string("R2"), f.converged});
      break;
    }
    case FitModel::R0R1: {
      const auto f = fitting::fit_r0_vs_r1(read_pairs(in, "r1", "r0"));
      t.columns = {"a", "b", "goodness", "goodness_label", "converged"};
      t.rows.push_back({f.a, f.b, f.goodness, std::string("R2"), f.converged});
      break;
    }
    case FitModel::M0: {
      const auto f = fitting::fit_m0_vs_rho0(read_pairs(in, "rho0", "m0"));
      t.columns = {"delta_m", "lambda", "goodness", "goodness_label", "converged"};
      t.rows.push_back({f.delta_m, f.lambda, f.goodness, std::string("R2"), f.converged});
      break;
    }
    case FitModel::Delta: {
      const auto pairs = read_pairs(in, "rho0", "m0");
      t.columns = {"slope", "samples"};
      t.rows.push_back({fitting::delta_relation_check(pairs), std::uint64_t{pairs.size()}});
      break;
    }
  }
  return t;
}

struct SurfaceRow {
  fitting::SurfaceFit fit;
  std::uint32_t txn_length = 0;
};

std::vector<SurfaceRow> read_surfaces(const ExperimentSpec& s) {
  const TextTable in = read_table(s.input);
  const std::size_t cA = in.column("A");
  const std::size_t cBp = in.column("B_psi");
  const std::size_t cBa = in.column("B_alpha");
  const std::size_t cg = in.column("gamma_alpha");
  const std::size_t cd = in.column("delta_alpha");
  const std::size_t cc = in.column("c");
  const auto cL = in.find_column("txn_length");
  const auto cgood = in.find_column("goodness");
  std::vector<SurfaceRow> out;
  for (std::size_t r = 0; r < in.rows.size(); ++r) {
    SurfaceRow row;
    row.fit.big_a = cell_number(in, r, cA);
    row.fit.b_psi = cell_number(in, r, cBp);
    row.fit.b_alpha = cell_number(in, r, cBa);
    row.fit.gamma_alpha = cell_number(in, r, cg);
    row.fit.delta_alpha = cell_number(in, r, cd);
    row.fit.c = cell_number(in, r, cc);
    if (cgood) row.fit.goodness = cell_number(in, r, *cgood);
    row.txn_length = s.config.txn_length;
    if (cL) {
      const double L = cell_number(in, r, *cL);
      if (L >= 1.0) row.txn_length = static_cast<std::uint32_t>(L);
    }
    out.push_back(row);
  }
  if (out.empty()) throw InvalidParameter(s.input + ": no surface fits");
  return out;
}

Table flatten_cmd(const ExperimentSpec& s, bool& all_flagged) {
  const SurfaceRow surface = read_surfaces(s).front();
  Table t;
  if (s.verify) {
    flatten::VerifyOptions vo;
    vo.rel_tol = s.rel_tol;
    vo.psi0_prime_scale = s.psi0_prime_scale;
    vo.search = search_of(s);
    const auto check = flatten::verify_flattening(s.config, surface.fit, ensemble_of(s), vo);
    const double scale = std::max(check.original.r1, check.flattened.r1);
    const double rel = scale > 0.0 ? std::abs(check.original.r1 - check.flattened.r1) / scale : 0.0;
    t.columns = {"alpha", "psi0", "txn_length", "psi0_prime", "ln_r1_target", "r0_original",
                 "r1_original", "r0_flattened", "r1_flattened", "r1_rel_diff", "rel_tol",
                 "equivalent"};
    t.rows.push_back({s.config.alpha, s.config.psi0, std::uint64_t{s.config.txn_length},
                      check.psi0_prime, check.ln_r1_target, check.original.r0, check.original.r1,
                      check.flattened.r0, check.flattened.r1, rel, s.rel_tol, check.equivalent});
    all_flagged = check.original.r1_flag != SearchFlag::None;
    return t;
  }
  t.columns = {"alpha", "psi0", "txn_length", "ln_r1_target", "psi0_prime", "psi_ratio"};
  for (double alpha : s.alpha_grid) {
    for (double psi0 : s.psi0_grid) {
      const auto r = flatten::flatten(surface.fit, alpha, psi0, s.config.txn_length);
      t.rows.push_back({alpha, psi0, std::uint64_t{s.config.txn_length}, r.ln_r1_target,
                        r.psi0_prime, r.psi_ratio});
    }
  }
  return t;
}

Table prime_alpha(const ExperimentSpec& s, bool&) {
  Table t;
  t.columns = {"txn_length", "alpha_prime", "psi_at_peak", "alpha_lo", "alpha_hi",
               "range_restricted"};
  for (const auto& row : read_surfaces(s)) {
    const auto p = flatten::prime_impact_factor(row.fit, s.config.psi0, row.txn_length,
                                                s.alpha_min, s.alpha_max, s.tol);
    t.rows.push_back({std::uint64_t{p.txn_length}, p.alpha_prime, p.psi_at_peak, p.alpha_lo,
                      p.alpha_hi, p.range_restricted});
  }
  return t;
}

}  // namespace

ResultEnvelope run_command(const ExperimentSpec& spec) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();
  ResultEnvelope env;
  env.tool_version = std::string(tool_version());
  env.config_digest = config_digest(spec);
  env.base_seed = spec.base_seed;
  env.spec_text = emit_spec(spec);

  bool flagged = false;
  switch (spec.command) {
    case Command::Simulate: env.payload = simulate(spec, flagged); break;
    case Command::Profile: env.payload = profile(spec, flagged); break;
    case Command::SweepGrid: env.payload = sweep_grid(spec, flagged); break;
    case Command::SweepCapacity: env.payload = sweep_capacity(spec, flagged); break;
    case Command::Fit: env.payload = fit(spec, flagged); break;
    case Command::Flatten: env.payload = flatten_cmd(spec, flagged); break;
    case Command::PrimeAlpha: env.payload = prime_alpha(spec, flagged); break;
  }
  env.all_flagged = flagged;
  env.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return env;
}

std::string envelope_metadata(const ExperimentSpec& spec, const ResultEnvelope& env) {
  nlohmann::ordered_json meta;
  meta["tool_version"] = env.tool_version;
  meta["command"] = std::string(to_string(spec.command));
  meta["config_digest"] = env.config_digest;
  meta["base_seed"] = env.base_seed;
  meta["first_index"] = spec.first_index;
  meta["seed_derivation"] = "splitmix64(base_seed ^ splitmix64(run_index))";
  meta["prng"] = "mt19937_64";
  meta["records"] = env.payload.rows.size();
  if (spec.command == Command::Fit) meta["goodness"] = "R2 (coefficient of determination)";
  meta["all_flagged"] = env.all_flagged;
  meta["wall_time"] = env.wall_time;
  meta["spec"] = env.spec_text;
  return meta.dump(2) + "\n";
}

int execute(const ExperimentSpec& spec) {
  const ResultEnvelope env = run_command(spec);
  if (spec.output_path.empty()) {
    write_table(std::cout, env.payload, spec.format);
    std::cout.flush();
  } else {
    {
      std::ofstream out(spec.output_path, std::ios::binary);
      if (!out) throw InvalidParameter("cannot write '" + spec.output_path + "'");
      write_table(out, env.payload, spec.format);
      if (!out) throw InvalidParameter("error writing '" + spec.output_path + "'");
    }
    const std::string meta_path = spec.output_path + ".meta.json";
    std::ofstream meta(meta_path, std::ios::binary);
    if (!meta) throw InvalidParameter("cannot write '" + meta_path + "'");
    meta << envelope_metadata(spec, env);
  }
  if (env.all_flagged) {
    std::cerr << "tonsim: every search hit its floor or ceiling; no threshold was found\n";
    return 3;
  }
  return 0;
}

}  // namespace tonsim::cli
