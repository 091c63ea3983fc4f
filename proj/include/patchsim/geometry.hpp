#pragma once

// Continuous-space micro-model used to calibrate the patch-model rates: a
// bounded map with water sources (each source seeds one Voronoi patch), a
// mobile base station on a rectangular route, and zebra agents with three
// movement modes plus a daily thirst-driven walk to the nearest source.
//
// Units: metres and seconds inside this module; calibrated rates are per day.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "patchsim/model.hpp"
#include "patchsim/rng.hpp"

namespace patchsim::geometry {

inline constexpr double kSecondsPerDay = 86400.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

/// Axis-aligned rectangle traversed counter-clockwise from `lower` (the
/// lower-left start corner) at constant speed, one lap per period.
struct Route {
  Point lower;
  Point upper;
  double period_s = kSecondsPerDay;

  double perimeter() const { return 2.0 * ((upper.x - lower.x) + (upper.y - lower.y)); }
};

struct WorldMap {
  double width = 20000.0;
  double height = 20000.0;
  std::vector<Point> water_sources;
  Route base_route;
  double peer_range = 100.0;
  double radio_range = 1000.0;
  double contact_lockout_s = 1800.0;

  bool contains(Point p) const { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }
  std::size_t patches() const { return water_sources.size(); }
  void validate() const;
};

/// Rectangle inset 25% from every edge, one lap per day.
Route default_route(double width, double height);

/// Map with `count` water sources drawn uniformly over the area.
WorldMap with_random_sources(WorldMap map, std::size_t count, Rng& rng);

enum class Mode : int { grazing = 0, graze_walking = 1, fast_moving = 2, thirsty = 3 };

struct ModeParams {
  double speed = 0.0;            ///< m/s
  double turn_interval_s = 0.0;  ///< heading is resampled this often
};

struct MovementParams {
  std::array<ModeParams, 3> modes{{{0.1, 180.0}, {0.5, 360.0}, {1.5, 900.0}}};
  /// Row m: probabilities of the next mode at each decision epoch.
  std::array<std::array<double, 3>, 3> switching{{{0.9, 0.05, 0.05},
                                                  {0.05, 0.9, 0.05},
                                                  {0.05, 0.05, 0.9}}};
  double thirst_speed = 1.0;
  double decision_step_s = 180.0;
  /// Time of day the thirst walk starts; unset means uniform per day.
  std::optional<double> thirst_time_of_day_s;

  void validate() const;
};

struct ZebraAgent {
  Point position;
  double heading = 0.0;
  Mode mode = Mode::grazing;
  PatchIndex home_patch = 0;
  double clock_s = 0.0;
  double next_thirst_s = 0.0;
  int steps_until_turn = 0;
};

/// Nearest water source; ties go to the lowest index. Throws
/// std::out_of_range for points outside the map.
PatchIndex patch_of(Point p, const WorldMap& map);

Point base_position(double t_s, const WorldMap& map);

Point random_point(const WorldMap& map, Rng& rng);
/// Uniform point of the given patch (rejection sampling over the map).
Point random_point_in_patch(const WorldMap& map, PatchIndex patch, Rng& rng);

ZebraAgent make_agent(PatchIndex home, Point position, const MovementParams& params, Rng& rng);

/// One decision step of length dt (normally params.decision_step_s).
ZebraAgent step_agent(ZebraAgent agent, double dt, const MovementParams& params,
                      const WorldMap& map, Rng& rng);

struct CalibrationCounts {
  std::vector<std::uint64_t> base;
  SquareMatrix<std::uint64_t> peer;
  SquareMatrix<std::uint64_t> migration;
};

struct CalibrationResult {
  RateParameters rates;
  CalibrationCounts counts;
  double sim_duration_days = 0.0;
  double radio_range = 0.0;
  std::uint64_t seed = 0;
  bool no_events = false;  ///< nothing was observed; all rates are zero
};

/// One probe agent per patch, placed uniformly in its patch.
CalibrationResult calibrate(const WorldMap& map, const MovementParams& params, double duration_days,
                            std::uint64_t seed);

/// Same agent trajectories evaluated for several radio ranges at once; entry r
/// equals calibrate() with map.radio_range = radio_ranges[r].
std::vector<CalibrationResult> calibrate_ranges(const WorldMap& map, const MovementParams& params,
                                                double duration_days, std::uint64_t seed,
                                                std::span<const double> radio_ranges);

/// Calibration from explicit initial agents (one per patch, in patch order).
/// `rng` drives movement and relocation; the result's seed field is left 0.
std::vector<CalibrationResult> calibrate_agents(const WorldMap& map, const MovementParams& params,
                                                double duration_days,
                                                std::span<const double> radio_ranges,
                                                std::vector<ZebraAgent> agents, Rng& rng);

struct Histogram {
  double bin_width = 0.0;
  std::vector<double> mass;
};

/// Distance from a single agent to the single water source, sampled every
/// decision step, normalised. The agent starts at the source.
Histogram distance_histogram(const WorldMap& map, const MovementParams& params,
                             double duration_days, std::size_t bins, std::uint64_t seed);

double l1_distance(const Histogram& a, const Histogram& b);

}  // namespace patchsim::geometry
