#include "patchsim/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include <omp.h>

namespace patchsim {

void SimulationConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("simulation horizon must be finite and > 0");
  }
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    const double s = sample_times[k];
    if (!(s >= 0.0 && s <= horizon)) {
      throw std::invalid_argument("sample time " + std::to_string(s) + " outside [0, horizon]");
    }
    if (k > 0 && !(s > sample_times[k - 1])) {
      throw std::invalid_argument("sample times must be strictly increasing");
    }
  }
}

std::vector<double> uniform_grid(double horizon, double step) {
  if (!(step > 0.0) || !(horizon >= 0.0)) {
    throw std::invalid_argument("uniform_grid: need step > 0 and horizon >= 0");
  }
  std::vector<double> grid;
  const double ratio = horizon / step;
  const auto whole = static_cast<std::int64_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(whole)) < 1e-9 * std::max(1.0, ratio)) {
    // horizon is a multiple of step: spread exactly so the last point is horizon.
    grid.reserve(static_cast<std::size_t>(whole) + 1);
    for (std::int64_t k = 0; k <= whole; ++k) {
      grid.push_back(whole == 0 ? 0.0 : horizon * static_cast<double>(k) / static_cast<double>(whole));
    }
  } else {
    for (std::int64_t k = 0; static_cast<double>(k) * step < horizon; ++k) {
      grid.push_back(static_cast<double>(k) * step);
    }
    grid.push_back(horizon);
  }
  return grid;
}

RealTrajectory Trajectory::to_real() const {
  RealTrajectory real;
  real.n_patches = states.empty() ? 0 : states.front().size();
  real.times = times;
  real.states.reserve(states.size());
  for (const auto& s : states) real.states.push_back(flatten(s));
  return real;
}

EventTable::EventTable(std::span<const Count> population, const RateParameters& rates)
    : events_(enumerate_events(population, rates)) {
  cumulative_.reserve(events_.size());
  for (const auto& e : events_) {
    total_ += e.rate;
    cumulative_.push_back(total_);
  }
}

const EventInstance& EventTable::select(double u) const {
  if (events_.empty()) throw std::logic_error("EventTable::select on empty table");
  const double target = u * total_;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;  // u * total rounded up to total
  return events_[static_cast<std::size_t>(it - cumulative_.begin())];
}

std::optional<ScheduledEvent> next_event(const SystemState& state, const RateParameters& rates,
                                         Rng& rng) {
  const EventTable table(state.population, rates);
  if (table.empty()) return std::nullopt;
  const double dt = exponential(rng, table.total());
  const double u = uniform01(rng);
  return ScheduledEvent{dt, table.select(u)};
}

std::vector<Count> place_uniform(Count total, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("place_uniform: no patches");
  std::vector<Count> counts(n, 0);
  for (Count z = 0; z < total; ++z) ++counts[uniform_index(rng, n)];
  return counts;
}

namespace {

void record(Trajectory& traj, const SystemState& s) {
  traj.times.push_back(s.t);
  traj.states.push_back(s);
}

// Drift to exactly time `target`.
void drift_to(SystemState& s, double target) {
  inplace::advance_ages(s, target - s.t);
  s.t = target;
}

}  // namespace

Trajectory simulate(const PatchModel& model, const SimulationConfig& cfg) {
  model.validate();
  cfg.validate();

  Rng rng(cfg.seed);
  SystemState state = SystemState::initial(model);
  if (cfg.placement == Placement::uniform_random) {
    state.population = place_uniform(model.population(), model.n_patches, rng);
  }

  Trajectory traj;
  traj.times.reserve(cfg.sample_times.size());
  traj.states.reserve(cfg.sample_times.size());

  EventTable table(state.population, model.rates);
  std::size_t next_sample = 0;
  const auto& samples = cfg.sample_times;

  while (true) {
    double t_event = std::numeric_limits<double>::infinity();
    double u = 0.0;
    if (!table.empty()) {
      t_event = state.t + exponential(rng, table.total());
      u = uniform01(rng);
    }
    while (next_sample < samples.size() && samples[next_sample] < t_event) {
      drift_to(state, samples[next_sample]);
      record(traj, state);
      ++next_sample;
    }
    if (t_event > cfg.horizon) {
      break;
    }
    drift_to(state, t_event);
    const EventInstance event = table.select(u);
    inplace::apply_event(state, event);
    if (cfg.record_events) traj.events.push_back({t_event, event});
    if (event.kind == EventKind::patch_move) {
      table = EventTable(state.population, model.rates);
    }
  }
  return traj;
}

SimulationConfig child_config(const SimulationConfig& cfg, std::size_t run) {
  SimulationConfig child = cfg;
  child.seed = derive_seed(cfg.seed, run);
  return child;
}

std::vector<Trajectory> run_ensemble_serial(const PatchModel& model, const SimulationConfig& cfg,
                                            std::size_t n_runs) {
  if (n_runs < 1) throw std::invalid_argument("run_ensemble: n_runs must be >= 1");
  std::vector<Trajectory> runs(n_runs);
  for (std::size_t k = 0; k < n_runs; ++k) runs[k] = simulate(model, child_config(cfg, k));
  return runs;
}

std::vector<Trajectory> run_ensemble(const PatchModel& model, const SimulationConfig& cfg,
                                     std::size_t n_runs, int jobs) {
  if (n_runs < 1) throw std::invalid_argument("run_ensemble: n_runs must be >= 1");
  model.validate();
  cfg.validate();
  std::vector<Trajectory> runs(n_runs);
  std::vector<std::exception_ptr> failures(n_runs);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(n_runs);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t k = 0; k < count; ++k) {
    const auto run = static_cast<std::size_t>(k);
    try {
      runs[run] = simulate(model, child_config(cfg, run));
    } catch (...) {
      failures[run] = std::current_exception();
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return runs;
}

}  // namespace patchsim
