// Serial reference against the OpenMP paths. Arg = number of runs.

#include <benchmark/benchmark.h>

#include "patchsim/geometry.hpp"
#include "patchsim/metrics.hpp"
#include "patchsim/ssa.hpp"

using namespace patchsim;

namespace {

const PatchModel& bench_model() {
  static const PatchModel model = [] {
    const std::size_t n = 10;
    PatchModel m;
    m.n_patches = n;
    m.rates = RateParameters::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
      m.rates.alpha[i] = 0.02 * static_cast<double>(i + 1);
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        m.rates.beta(i, j) = 0.002;
        m.rates.gamma(i, j) = 0.01;
      }
    }
    m.initial_population = metrics::even_population(50, n);
    return m;
  }();
  return model;
}

SimulationConfig bench_config() {
  SimulationConfig cfg;
  cfg.horizon = 90.0;
  cfg.sample_times = uniform_grid(90.0, 0.1);
  cfg.placement = Placement::uniform_random;
  return cfg;
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto cfg = bench_config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ensemble_serial(bench_model(), cfg, static_cast<std::size_t>(state.range(0))));
  }
}

void BM_EnsembleParallel(benchmark::State& state) {
  const auto cfg = bench_config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ensemble(bench_model(), cfg, static_cast<std::size_t>(state.range(0))));
  }
}

metrics::SweepOptions sweep_options(std::size_t runs) {
  metrics::SweepOptions opt;
  opt.runs = runs;
  opt.calibration_days = 30;
  return opt;
}

geometry::WorldMap sweep_map() {
  geometry::WorldMap map;
  map.base_route = geometry::default_route(map.width, map.height);
  return map;
}

const std::vector<double> kRanges{1000, 4000, 8000};

void BM_SweepSerial(benchmark::State& state) {
  const auto opt = sweep_options(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::sweep_radio_range_serial(sweep_map(), {}, kRanges, opt));
  }
}

void BM_SweepParallel(benchmark::State& state) {
  const auto opt = sweep_options(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::sweep_radio_range(sweep_map(), {}, kRanges, opt));
  }
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
