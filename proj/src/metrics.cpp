#include "patchsim/metrics.hpp"

#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>

#include <omp.h>

namespace patchsim::metrics {

DeliveryReport delivery_rate(const SystemState& state, Count N_total, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("delivery_rate: t must be > 0");
  if (N_total != state.total_population()) {
    throw std::invalid_argument("delivery_rate: N_total must equal the summed patch populations");
  }
  if (N_total <= 0) throw std::invalid_argument("delivery_rate: population must be > 0");
  DeliveryReport report;
  report.t = t;
  report.N_total = N_total;
  double undelivered = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double term = static_cast<double>(state.population[i]) * state.base_age[i];
    report.per_patch_undelivered.push_back(term);
    undelivered += term;
  }
  report.R = 1.0 - undelivered / (static_cast<double>(N_total) * t);
  return report;
}

DeliveryReport delivery_rate(const SystemState& state) {
  return delivery_rate(state, state.total_population(), state.t);
}

double time_averaged_delivery_rate(const Trajectory& trajectory) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : trajectory.states) {
    if (s.t > 0.0) {
      sum += delivery_rate(s).R;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("time-averaged R needs samples with t > 0");
  return sum / static_cast<double>(count);
}

double run_delivery_rate(const Trajectory& trajectory, RMode mode) {
  if (trajectory.states.empty()) throw std::invalid_argument("trajectory has no samples");
  if (mode == RMode::time_average) return time_averaged_delivery_rate(trajectory);
  return delivery_rate(trajectory.states.back()).R;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

void check_grid(std::span<const double> times, std::span<const double> grid) {
  if (times.size() != grid.size()) throw std::invalid_argument("ensemble_mean: mismatched grids");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (times[k] != grid[k]) throw std::invalid_argument("ensemble_mean: mismatched grids");
  }
}

}  // namespace

RealTrajectory ensemble_mean(std::span<const RealTrajectory> runs, std::span<const double> grid) {
  if (runs.empty()) throw std::invalid_argument("ensemble_mean: no trajectories");
  RealTrajectory mean;
  mean.n_patches = runs.front().n_patches;
  mean.times.assign(grid.begin(), grid.end());
  const std::size_t width = StateLayout(mean.n_patches).size();
  mean.states.assign(grid.size(), FlatState(width, 0.0));
  for (const auto& run : runs) {
    check_grid(run.times, grid);
    if (run.n_patches != mean.n_patches) {
      throw std::invalid_argument("ensemble_mean: trajectories differ in patch count");
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (std::size_t c = 0; c < width; ++c) mean.states[k][c] += run.states[k][c];
    }
  }
  const double scale = static_cast<double>(runs.size());
  for (auto& row : mean.states) {
    for (double& v : row) v /= scale;
  }
  return mean;
}

RealTrajectory ensemble_mean(std::span<const Trajectory> runs, std::span<const double> grid) {
  std::vector<RealTrajectory> real;
  real.reserve(runs.size());
  for (const auto& run : runs) {
    check_grid(run.times, grid);
    real.push_back(run.to_real());
  }
  return ensemble_mean(std::span<const RealTrajectory>(real), grid);
}

std::vector<Count> even_population(Count total, std::size_t n) {
  if (n == 0) throw std::invalid_argument("even_population: no patches");
  std::vector<Count> counts(n, total / static_cast<Count>(n));
  const auto remainder = static_cast<std::size_t>(total % static_cast<Count>(n));
  for (std::size_t i = 0; i < remainder; ++i) ++counts[i];
  return counts;
}

namespace {

// Per-run outcome: one R per range, or the failure message.
struct RunOutcome {
  std::vector<std::optional<double>> R;
  std::vector<std::string> errors;
};

RunOutcome sweep_one_run(const geometry::WorldMap& base_map, const geometry::MovementParams& params,
                         std::span<const double> ranges, const SweepOptions& opt, std::size_t run) {
  RunOutcome out;
  out.R.assign(ranges.size(), std::nullopt);
  out.errors.assign(ranges.size(), {});
  std::vector<geometry::CalibrationResult> calibrations;
  try {
    geometry::WorldMap map = base_map;
    std::uint64_t calibration_seed = derive_seed(opt.seed, streams::calibration);
    if (opt.randomize_layout) {
      Rng layout_rng(derive_seed(derive_seed(opt.seed, streams::layout), run));
      map = geometry::with_random_sources(map, opt.source_count, layout_rng);
      calibration_seed = derive_seed(calibration_seed, run);
    }
    calibrations = geometry::calibrate_ranges(map, params, opt.calibration_days, calibration_seed, ranges);
  } catch (const std::exception& e) {
    for (auto& err : out.errors) err = std::string("calibration: ") + e.what();
    return out;
  }

  SimulationConfig cfg;
  cfg.horizon = opt.horizon;
  cfg.placement = opt.placement;
  cfg.sample_times = opt.r_mode == RMode::time_average ? uniform_grid(opt.horizon, opt.sample_step)
                                                       : std::vector<double>{opt.horizon};
  cfg.seed = derive_seed(opt.seed, streams::ensemble);
  const SimulationConfig run_cfg = child_config(cfg, run);

  for (std::size_t r = 0; r < ranges.size(); ++r) {
    try {
      PatchModel model;
      model.n_patches = calibrations[r].rates.size();
      model.rates = calibrations[r].rates;
      model.initial_population = even_population(opt.population, model.n_patches);
      out.R[r] = run_delivery_rate(simulate(model, run_cfg), opt.r_mode);
    } catch (const std::exception& e) {
      out.errors[r] = std::string("simulation: ") + e.what();
    }
  }
  return out;
}

std::vector<SweepRow> assemble(std::span<const double> ranges, const std::vector<RunOutcome>& runs) {
  std::vector<SweepRow> rows(ranges.size());
  for (std::size_t r = 0; r < ranges.size(); ++r) {
    SweepRow& row = rows[r];
    row.range_m = ranges[r];
    for (const auto& run : runs) {
      if (run.R[r]) {
        row.per_run_R.push_back(*run.R[r]);
      } else {
        row.complete = false;
        if (row.error.empty()) row.error = run.errors[r];
      }
    }
    const Summary s = summarize(row.per_run_R);
    row.mean_R = s.mean;
    row.std_R = s.stddev;
    row.runs = s.count;
  }
  return rows;
}

void check_sweep(std::span<const double> ranges, const SweepOptions& opt) {
  if (ranges.empty()) throw std::invalid_argument("sweep needs at least one radio range");
  if (opt.runs < 1) throw std::invalid_argument("sweep needs at least one run per range");
}

}  // namespace

std::vector<SweepRow> sweep_radio_range_serial(const geometry::WorldMap& map,
                                               const geometry::MovementParams& params,
                                               std::span<const double> ranges,
                                               const SweepOptions& options) {
  check_sweep(ranges, options);
  std::vector<RunOutcome> runs;
  runs.reserve(options.runs);
  for (std::size_t k = 0; k < options.runs; ++k) {
    runs.push_back(sweep_one_run(map, params, ranges, options, k));
  }
  return assemble(ranges, runs);
}

std::vector<SweepRow> sweep_radio_range(const geometry::WorldMap& map,
                                        const geometry::MovementParams& params,
                                        std::span<const double> ranges,
                                        const SweepOptions& options) {
  check_sweep(ranges, options);
  std::vector<RunOutcome> runs(options.runs);
  const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(options.runs);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t k = 0; k < count; ++k) {
    const auto run = static_cast<std::size_t>(k);
    runs[run] = sweep_one_run(map, params, ranges, options, run);
  }
  return assemble(ranges, runs);
}

}  // namespace patchsim::metrics
