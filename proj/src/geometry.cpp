#include "patchsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace patchsim::geometry {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void WorldMap::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("map dimensions must be > 0");
  if (water_sources.empty()) throw std::invalid_argument("map needs at least one water source");
  for (const auto& s : water_sources) {
    if (!contains(s)) throw std::invalid_argument("water source outside the map");
  }
  if (!contains(base_route.lower) || !contains(base_route.upper) ||
      !(base_route.lower.x <= base_route.upper.x) || !(base_route.lower.y <= base_route.upper.y)) {
    throw std::invalid_argument("base route must be a rectangle inside the map");
  }
  if (!(base_route.period_s > 0.0)) throw std::invalid_argument("base route period must be > 0");
  if (!(peer_range > 0.0)) throw std::invalid_argument("peer range must be > 0");
  // A zero radio range is allowed: it disables base contact.
  if (!(radio_range >= 0.0)) throw std::invalid_argument("radio range must be >= 0");
  if (!(contact_lockout_s >= 0.0)) throw std::invalid_argument("contact lockout must be >= 0");
}

Route default_route(double width, double height) {
  return Route{{0.25 * width, 0.25 * height}, {0.75 * width, 0.75 * height}, kSecondsPerDay};
}

Point random_point(const WorldMap& map, Rng& rng) {
  const double x = uniform_real(rng, 0.0, map.width);
  const double y = uniform_real(rng, 0.0, map.height);
  return {x, y};
}

WorldMap with_random_sources(WorldMap map, std::size_t count, Rng& rng) {
  if (count == 0) throw std::invalid_argument("need at least one water source");
  map.water_sources.clear();
  for (std::size_t k = 0; k < count; ++k) map.water_sources.push_back(random_point(map, rng));
  return map;
}

void MovementParams::validate() const {
  for (std::size_t m = 0; m < modes.size(); ++m) {
    if (!(modes[m].speed >= 0.0) || !(modes[m].turn_interval_s > 0.0)) {
      throw std::invalid_argument("movement mode " + std::to_string(m) +
                                  ": speed must be >= 0 and turn interval > 0");
    }
    double row = 0.0;
    for (double p : switching[m]) {
      if (!(p >= 0.0)) throw std::invalid_argument("switching probabilities must be >= 0");
      row += p;
    }
    if (std::abs(row - 1.0) > 1e-9) {
      throw std::invalid_argument("switching probabilities of mode " + std::to_string(m) +
                                  " must sum to 1");
    }
  }
  if (!(thirst_speed >= 0.0)) throw std::invalid_argument("thirst speed must be >= 0");
  if (!(decision_step_s > 0.0)) throw std::invalid_argument("decision step must be > 0");
  if (thirst_time_of_day_s &&
      !(*thirst_time_of_day_s >= 0.0 && *thirst_time_of_day_s < kSecondsPerDay)) {
    throw std::invalid_argument("thirst time of day must be within [0, 86400) s");
  }
}

PatchIndex patch_of(Point p, const WorldMap& map) {
  if (!map.contains(p)) throw std::out_of_range("patch_of: point outside the map");
  if (map.water_sources.empty()) throw std::invalid_argument("patch_of: map has no water sources");
  PatchIndex best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (PatchIndex k = 0; k < map.water_sources.size(); ++k) {
    const double dx = p.x - map.water_sources[k].x;
    const double dy = p.y - map.water_sources[k].y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  return best;
}

Point base_position(double t_s, const WorldMap& map) {
  if (!(t_s >= 0.0)) throw std::invalid_argument("base_position: t must be >= 0");
  const Route& r = map.base_route;
  const double w = r.upper.x - r.lower.x;
  const double h = r.upper.y - r.lower.y;
  const double perimeter = r.perimeter();
  if (perimeter == 0.0) return r.lower;
  double s = std::fmod(t_s, r.period_s) / r.period_s * perimeter;
  if (s < w) return {r.lower.x + s, r.lower.y};
  s -= w;
  if (s < h) return {r.upper.x, r.lower.y + s};
  s -= h;
  if (s < w) return {r.upper.x - s, r.upper.y};
  s -= w;
  return {r.lower.x, r.upper.y - std::min(s, h)};
}

Point random_point_in_patch(const WorldMap& map, PatchIndex patch, Rng& rng) {
  if (patch >= map.patches()) throw std::out_of_range("random_point_in_patch: bad patch");
  constexpr int kMaxAttempts = 1'000'000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Point p = random_point(map, rng);
    if (patch_of(p, map) == patch) return p;
  }
  // Degenerate patch (e.g. coincident sources): fall back to its seed point.
  return map.water_sources[patch];
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double draw_thirst_time(const MovementParams& params, Rng& rng) {
  return params.thirst_time_of_day_s ? *params.thirst_time_of_day_s
                                     : uniform_real(rng, 0.0, kSecondsPerDay);
}

int turn_steps(const ModeParams& mode, double dt) {
  return std::max(1, static_cast<int>(std::lround(mode.turn_interval_s / dt)));
}

// Mirror position and heading off the map edges.
void reflect(ZebraAgent& a, const WorldMap& map) {
  for (int pass = 0; pass < 4 && !map.contains(a.position); ++pass) {
    if (a.position.x < 0.0) {
      a.position.x = -a.position.x;
      a.heading = std::numbers::pi - a.heading;
    } else if (a.position.x > map.width) {
      a.position.x = 2.0 * map.width - a.position.x;
      a.heading = std::numbers::pi - a.heading;
    }
    if (a.position.y < 0.0) {
      a.position.y = -a.position.y;
      a.heading = -a.heading;
    } else if (a.position.y > map.height) {
      a.position.y = 2.0 * map.height - a.position.y;
      a.heading = -a.heading;
    }
  }
  a.position.x = std::clamp(a.position.x, 0.0, map.width);
  a.position.y = std::clamp(a.position.y, 0.0, map.height);
  a.heading = std::fmod(a.heading, kTwoPi);
  if (a.heading < 0.0) a.heading += kTwoPi;
}

}  // namespace

ZebraAgent make_agent(PatchIndex home, Point position, const MovementParams& params, Rng& rng) {
  ZebraAgent a;
  a.position = position;
  a.heading = uniform_real(rng, 0.0, kTwoPi);
  a.mode = Mode::grazing;
  a.home_patch = home;
  a.clock_s = 0.0;
  a.next_thirst_s = draw_thirst_time(params, rng);
  a.steps_until_turn = turn_steps(params.modes[0], params.decision_step_s);
  return a;
}

ZebraAgent step_agent(ZebraAgent a, double dt, const MovementParams& params, const WorldMap& map,
                      Rng& rng) {
  if (a.clock_s >= a.next_thirst_s) {
    a.mode = Mode::thirsty;
    const double next_day = (std::floor(a.clock_s / kSecondsPerDay) + 1.0) * kSecondsPerDay;
    a.next_thirst_s = next_day + draw_thirst_time(params, rng);
  }

  if (a.mode == Mode::thirsty) {
    const Point target = map.water_sources[patch_of(a.position, map)];
    const double d = distance(a.position, target);
    const double travel = params.thirst_speed * dt;
    if (d <= travel) {
      a.position = target;
      a.mode = Mode::grazing;
      a.steps_until_turn = 0;
    } else {
      a.heading = std::atan2(target.y - a.position.y, target.x - a.position.x);
      a.position.x += travel * (target.x - a.position.x) / d;
      a.position.y += travel * (target.y - a.position.y) / d;
    }
  } else {
    const auto current = static_cast<std::size_t>(a.mode);
    const auto next = static_cast<Mode>(categorical(rng, params.switching[current]));
    if (next != a.mode || a.steps_until_turn <= 0) {
      a.mode = next;
      a.heading = uniform_real(rng, 0.0, kTwoPi);
      a.steps_until_turn = turn_steps(params.modes[static_cast<std::size_t>(next)], dt);
    }
    const double travel = params.modes[static_cast<std::size_t>(a.mode)].speed * dt;
    a.position.x += travel * std::cos(a.heading);
    a.position.y += travel * std::sin(a.heading);
    --a.steps_until_turn;
  }
  reflect(a, map);
  a.clock_s += dt;
  return a;
}

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min() / 2;

// Step index of the last counted contact per pair; a new contact counts only
// once `lockout_steps` steps have passed.
struct Lockout {
  std::int64_t lockout_steps = 0;
  std::vector<std::int64_t> last;

  Lockout(std::size_t pairs, std::int64_t steps) : lockout_steps(steps), last(pairs, kNever) {}

  bool try_contact(std::size_t pair, std::int64_t step) {
    if (step - last[pair] < lockout_steps) return false;
    last[pair] = step;
    return true;
  }
};

}  // namespace

std::vector<CalibrationResult> calibrate_agents(const WorldMap& map, const MovementParams& params,
                                                double duration_days,
                                                std::span<const double> radio_ranges,
                                                std::vector<ZebraAgent> agents, Rng& rng) {
  map.validate();
  params.validate();
  const std::size_t n = map.patches();
  if (agents.size() != n) throw std::invalid_argument("calibration needs one agent per patch");
  if (!(duration_days > 0.0)) throw std::invalid_argument("calibration duration must be > 0");
  for (double r : radio_ranges) {
    if (!(r >= 0.0)) throw std::invalid_argument("radio range must be >= 0");
  }

  const double dt = params.decision_step_s;
  const auto steps = static_cast<std::int64_t>(std::llround(duration_days * kSecondsPerDay / dt));
  const auto lockout_steps =
      static_cast<std::int64_t>(std::ceil(map.contact_lockout_s / dt - 1e-9));
  const std::size_t n_ranges = radio_ranges.size();
  const double reach = params.thirst_speed * dt;

  std::vector<CalibrationCounts> counts(n_ranges);
  for (auto& c : counts) {
    c.base.assign(n, 0);
    c.peer = SquareMatrix<std::uint64_t>(n, 0);
    c.migration = SquareMatrix<std::uint64_t>(n, 0);
  }
  // Peer contacts and migrations do not depend on the radio range.
  SquareMatrix<std::uint64_t> peer(n, 0);
  SquareMatrix<std::uint64_t> migration(n, 0);

  std::vector<Lockout> base_lockout(n_ranges, Lockout(n, lockout_steps));
  Lockout peer_lockout(n * n, lockout_steps);
  std::vector<bool> away(n, false);
  std::int64_t day = 0;

  for (std::int64_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    const auto today = static_cast<std::int64_t>(std::floor(t / kSecondsPerDay));
    if (today != day) {
      day = today;
      for (std::size_t i = 0; i < n; ++i) {
        if (!away[i]) continue;
        agents[i].position = random_point_in_patch(map, i, rng);
        agents[i].mode = Mode::grazing;
        agents[i].steps_until_turn = 0;
        away[i] = false;
      }
    }

    const Point base = base_position(t, map);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = distance(agents[i].position, base);
      for (std::size_t r = 0; r < n_ranges; ++r) {
        if (d < radio_ranges[r] && base_lockout[r].try_contact(i, step)) ++counts[r].base[i];
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (distance(agents[i].position, agents[j].position) < map.peer_range &&
            peer_lockout.try_contact(i * n + j, step)) {
          ++peer(i, j);
          ++peer(j, i);
        }
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (away[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && distance(agents[i].position, map.water_sources[j]) <= reach) {
          ++migration(i, j);
          away[i] = true;
          break;
        }
      }
    }

    for (auto& a : agents) a = step_agent(std::move(a), dt, params, map, rng);
  }

  const double days = static_cast<double>(steps) * dt / kSecondsPerDay;
  std::vector<CalibrationResult> results;
  results.reserve(n_ranges);
  for (std::size_t r = 0; r < n_ranges; ++r) {
    CalibrationResult res;
    res.counts = std::move(counts[r]);
    res.counts.peer = peer;
    res.counts.migration = migration;
    res.sim_duration_days = days;
    res.radio_range = radio_ranges[r];
    res.rates = RateParameters::zeros(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      res.rates.alpha[i] = static_cast<double>(res.counts.base[i]) / days;
      any = any || res.counts.base[i] > 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        res.rates.beta(i, j) = static_cast<double>(peer(i, j)) / days;
        res.rates.gamma(i, j) = static_cast<double>(migration(i, j)) / days;
        any = any || peer(i, j) > 0 || migration(i, j) > 0;
      }
    }
    res.no_events = !any;
    results.push_back(std::move(res));
  }
  return results;
}

std::vector<CalibrationResult> calibrate_ranges(const WorldMap& map, const MovementParams& params,
                                                double duration_days, std::uint64_t seed,
                                                std::span<const double> radio_ranges) {
  map.validate();
  params.validate();
  if (!(duration_days >= 1.0)) throw std::invalid_argument("calibration needs at least one day");
  Rng rng(seed);
  std::vector<ZebraAgent> agents;
  agents.reserve(map.patches());
  for (std::size_t i = 0; i < map.patches(); ++i) {
    const Point start = random_point_in_patch(map, i, rng);
    agents.push_back(make_agent(i, start, params, rng));
  }
  auto results = calibrate_agents(map, params, duration_days, radio_ranges, std::move(agents), rng);
  for (auto& r : results) r.seed = seed;
  return results;
}

CalibrationResult calibrate(const WorldMap& map, const MovementParams& params, double duration_days,
                            std::uint64_t seed) {
  const double range = map.radio_range;
  return calibrate_ranges(map, params, duration_days, seed, std::span<const double>(&range, 1))
      .front();
}

Histogram distance_histogram(const WorldMap& map, const MovementParams& params,
                             double duration_days, std::size_t bins, std::uint64_t seed) {
  map.validate();
  params.validate();
  if (map.patches() != 1) throw std::invalid_argument("distance_histogram needs exactly one source");
  if (bins == 0) throw std::invalid_argument("distance_histogram needs at least one bin");
  const Point source = map.water_sources.front();
  const double max_distance = std::hypot(map.width, map.height);
  Histogram h;
  h.bin_width = max_distance / static_cast<double>(bins);
  h.mass.assign(bins, 0.0);

  Rng rng(seed);
  ZebraAgent agent = make_agent(0, source, params, rng);
  const double dt = params.decision_step_s;
  const auto steps = static_cast<std::int64_t>(std::llround(duration_days * kSecondsPerDay / dt));
  std::vector<std::uint64_t> tally(bins, 0);
  for (std::int64_t step = 0; step < steps; ++step) {
    agent = step_agent(std::move(agent), dt, params, map, rng);
    const double d = distance(agent.position, source);
    const auto bin = std::min(bins - 1, static_cast<std::size_t>(d / h.bin_width));
    ++tally[bin];
  }
  if (steps > 0) {
    for (std::size_t b = 0; b < bins; ++b) {
      h.mass[b] = static_cast<double>(tally[b]) / static_cast<double>(steps);
    }
  }
  return h;
}

double l1_distance(const Histogram& a, const Histogram& b) {
  if (a.mass.size() != b.mass.size()) throw std::invalid_argument("histograms differ in bin count");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.mass.size(); ++k) sum += std::abs(a.mass[k] - b.mass[k]);
  return sum;
}

}  // namespace patchsim::geometry
