#include <benchmark/benchmark.h>

#include "tonsim/cost.hpp"
#include "tonsim/experiments.hpp"
#include "tonsim/fitting.hpp"
#include "tonsim/simulation.hpp"

namespace {

// One desk-scale run; the argument is the injection rate in hundredths.
void BM_RunSimulation(benchmark::State& state) {
  tonsim::TonConfig c = tonsim::desk_config();
  c.injection_rate = static_cast<double>(state.range(0)) / 100.0;
  std::uint64_t injected = 0;
  for (auto _ : state) {
    c.seed += 1;
    const auto stats = tonsim::run_simulation(c);
    injected += stats.injected;
    benchmark::DoNotOptimize(stats);
  }
  state.counters["txn/s"] = benchmark::Counter(static_cast<double>(injected), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_RunSimulation)->Arg(50)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_FindR1(benchmark::State& state) {
  const tonsim::TonConfig c = tonsim::desk_config();
  tonsim::experiments::Ensemble e;
  e.seeds = 8;
  e.jobs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tonsim::experiments::find_r1(c, e));
  }
}
BENCHMARK(BM_FindR1)->Unit(benchmark::kMillisecond);

void BM_FitSurface(benchmark::State& state) {
  tonsim::fitting::SurfaceFit truth{-0.8, 0.9, 3.0, 1.0, -0.4, 3.0, 1.0, true, 0};
  std::vector<tonsim::experiments::GridSample> grid;
  for (double a : {0.6, 0.8, 1.0, 1.2, 1.4}) {
    for (double p : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      tonsim::experiments::GridSample s;
      s.alpha = a;
      s.psi0 = p;
      s.ln_r1 = tonsim::fitting::predict_ln_r1(truth, a, p);
      grid.push_back(s);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(tonsim::fitting::fit_surface(grid));
}
BENCHMARK(BM_FitSurface)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
