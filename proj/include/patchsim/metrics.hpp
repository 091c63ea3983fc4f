#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchsim/geometry.hpp"
#include "patchsim/layout.hpp"
#include "patchsim/model.hpp"
#include "patchsim/ssa.hpp"

namespace patchsim::metrics {

/// Fraction of generated data the base station has collected:
///   R = 1 - sum_i N_i A_i / (N_total t).
/// The per-zebra data rate cancels and is not an input.
struct DeliveryReport {
  double R = 1.0;
  std::vector<double> per_patch_undelivered;  ///< N_i * A_i, zebra-days
  double t = 0.0;
  Count N_total = 0;
};

DeliveryReport delivery_rate(const SystemState& state, Count N_total, double t);
/// Uses t = state.t and N_total = sum of the state's populations.
DeliveryReport delivery_rate(const SystemState& state);

/// Mean of R over the sample times with t > 0.
double time_averaged_delivery_rate(const Trajectory& trajectory);

enum class RMode { horizon, time_average };

/// R of one run according to `mode`; `horizon` uses the last sample.
double run_delivery_rate(const Trajectory& trajectory, RMode mode);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation (n - 1); 0 for one value
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

/// Pointwise mean of every state component. Throws std::invalid_argument if
/// any trajectory's sample times differ from `grid`.
RealTrajectory ensemble_mean(std::span<const Trajectory> runs, std::span<const double> grid);
RealTrajectory ensemble_mean(std::span<const RealTrajectory> runs, std::span<const double> grid);

struct SweepOptions {
  Count population = 50;
  double horizon = 90.0;
  double sample_step = 0.1;         ///< only used for RMode::time_average
  double calibration_days = 365.0;
  std::size_t runs = 20;
  std::uint64_t seed = 1;
  bool randomize_layout = true;     ///< fresh water-source layout per run
  std::size_t source_count = 10;
  Placement placement = Placement::uniform_random;
  RMode r_mode = RMode::horizon;
  int jobs = 0;
};

struct SweepRow {
  double range_m = 0.0;
  double mean_R = 0.0;
  double std_R = 0.0;
  std::size_t runs = 0;       ///< successful runs
  bool complete = true;       ///< false when some runs failed
  std::string error;          ///< first failure message, if any
  std::vector<double> per_run_R;
};

/// For each radio range: calibrate, simulate `runs` independent runs and
/// report mean/stddev of R. Run k uses its own layout, calibration and
/// simulation streams, all derived from options.seed, so the table does not
/// depend on the thread count. OpenMP across runs.
std::vector<SweepRow> sweep_radio_range(const geometry::WorldMap& map,
                                        const geometry::MovementParams& params,
                                        std::span<const double> ranges,
                                        const SweepOptions& options);

/// Serial reference for sweep_radio_range; identical output.
std::vector<SweepRow> sweep_radio_range_serial(const geometry::WorldMap& map,
                                               const geometry::MovementParams& params,
                                               std::span<const double> ranges,
                                               const SweepOptions& options);

/// Population split as evenly as possible, remainder to the lowest indices.
std::vector<Count> even_population(Count total, std::size_t n);

}  // namespace patchsim::metrics
