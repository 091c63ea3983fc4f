#pragma once

// Exact event-driven simulation of the patch model. Ages drift at unit rate
// between events; event rates depend only on the population vector, so they
// are constant between patch moves and the waiting times are exactly
// exponential.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "patchsim/layout.hpp"
#include "patchsim/model.hpp"
#include "patchsim/rng.hpp"

namespace patchsim {

enum class Placement {
  fixed,           ///< start from model.initial_population as given
  uniform_random,  ///< multinomial placement of the total over patches, per run
};

struct SimulationConfig {
  double horizon = 90.0;
  std::uint64_t seed = 1;
  std::vector<double> sample_times;
  bool record_events = false;
  Placement placement = Placement::fixed;

  void validate() const;
};

/// Grid 0, step, 2*step, ... up to and including horizon.
std::vector<double> uniform_grid(double horizon, double step);

struct LoggedEvent {
  double t = 0.0;
  EventInstance event;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<LoggedEvent> events;  ///< empty unless record_events

  RealTrajectory to_real() const;
};

struct ScheduledEvent {
  double dt = 0.0;
  EventInstance event;
};

/// Rate table over the enumerated events with prefix sums for selection.
class EventTable {
 public:
  EventTable() = default;
  EventTable(std::span<const Count> population, const RateParameters& rates);

  double total() const { return total_; }
  bool empty() const { return events_.empty(); }
  std::span<const EventInstance> events() const { return events_; }

  /// Event whose cumulative-rate interval contains u * total, u in [0, 1).
  const EventInstance& select(double u) const;

 private:
  std::vector<EventInstance> events_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

/// Draws the waiting time, then the event. Returns nullopt when the total
/// rate is zero (no draws are consumed in that case).
std::optional<ScheduledEvent> next_event(const SystemState& state, const RateParameters& rates,
                                         Rng& rng);

/// Multinomial placement of `total` zebras over n patches with equal weights.
std::vector<Count> place_uniform(Count total, std::size_t n, Rng& rng);

Trajectory simulate(const PatchModel& model, const SimulationConfig& cfg);

/// Run k uses seed derive_seed(cfg.seed, k). OpenMP across runs; `jobs` = 0
/// uses the OpenMP default thread count.
std::vector<Trajectory> run_ensemble(const PatchModel& model, const SimulationConfig& cfg,
                                     std::size_t n_runs, int jobs = 0);

/// Serial reference for run_ensemble; identical output.
std::vector<Trajectory> run_ensemble_serial(const PatchModel& model, const SimulationConfig& cfg,
                                            std::size_t n_runs);

SimulationConfig child_config(const SimulationConfig& cfg, std::size_t run);

}  // namespace patchsim
