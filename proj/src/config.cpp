#include "patchsim/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include <yaml-cpp/yaml.h>

#include "patchsim/rng.hpp"

namespace patchsim::config {

namespace {

// Accepted keys per section path. Order is the order used in diagnostics.
const std::map<std::string, std::vector<std::string>>& key_table() {
  static const std::map<std::string, std::vector<std::string>> table{
      {"", {"map", "movement", "model", "simulation", "output"}},
      {"map",
       {"width", "height", "water_sources", "source_coordinates", "route", "peer_range",
        "radio_range", "radio_ranges", "contact_lockout_minutes", "randomize_layout"}},
      {"map.route", {"lower", "upper", "period_days"}},
      {"movement",
       {"grazing", "graze_walking", "fast_moving", "switching", "switch_probability",
        "thirst_speed", "decision_step_s", "thirst_time_of_day_s"}},
      {"movement.grazing", {"speed", "turn_interval_s"}},
      {"movement.graze_walking", {"speed", "turn_interval_s"}},
      {"movement.fast_moving", {"speed", "turn_interval_s"}},
      {"model", {"n_patches", "population", "placement", "initial_population", "initial_age"}},
      {"simulation",
       {"horizon", "sample_step", "seed", "runs", "calibration_days", "meanfield_step",
        "event_log", "r_mode"}},
      {"output", {"directory"}},
  };
  return table;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) const {
    std::ostringstream out;
    out << source_;
    if (!mark.is_null()) out << ':' << mark.line + 1 << ':' << mark.column + 1;
    out << ": " << message;
    throw ConfigError(out.str());
  }

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    fail(node.Mark(), message);
  }

  // Rejects keys not listed for `path`; returns false for a null section.
  bool section(const YAML::Node& node, const std::string& path) const {
    if (!node || node.IsNull()) return false;
    if (!node.IsMap()) fail(node, "'" + (path.empty() ? "<root>" : path) + "' must be a mapping");
    const auto& allowed = key_table().at(path);
    for (auto it = node.begin(); it != node.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(it->first, "unknown key '" + join(path, key) + "'");
      }
    }
    return true;
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& path, const char* expected) const {
    if (!node.IsScalar()) fail(node, path + ": expected " + expected);
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, path + ": expected " + expected + ", got '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& path) const {
    return scalar<double>(node, path, "a number");
  }

  double positive(const YAML::Node& node, const std::string& path) const {
    const double v = number(node, path);
    if (!(v > 0.0)) fail(node, path + ": must be > 0");
    return v;
  }

  double nonnegative(const YAML::Node& node, const std::string& path) const {
    const double v = number(node, path);
    if (!(v >= 0.0)) fail(node, path + ": must be >= 0");
    return v;
  }

  std::int64_t integer(const YAML::Node& node, const std::string& path) const {
    return scalar<std::int64_t>(node, path, "an integer");
  }

  std::size_t count(const YAML::Node& node, const std::string& path) const {
    const auto v = integer(node, path);
    if (v < 0) fail(node, path + ": must be >= 0");
    return static_cast<std::size_t>(v);
  }

  bool boolean(const YAML::Node& node, const std::string& path) const {
    return scalar<bool>(node, path, "true or false");
  }

  std::string string(const YAML::Node& node, const std::string& path) const {
    return scalar<std::string>(node, path, "a string");
  }

  geometry::Point point(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence() || node.size() != 2) fail(node, path + ": expected [x, y]");
    return {number(node[0], path + "[0]"), number(node[1], path + "[1]")};
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(node, path + ": expected a list of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < node.size(); ++k) {
      out.push_back(number(node[k], path + "[" + std::to_string(k) + "]"));
    }
    return out;
  }

 private:
  std::string source_;
};

void read_map(const Reader& rd, const YAML::Node& node, MapSection& map) {
  if (!rd.section(node, "map")) return;
  if (node["width"]) map.width = rd.positive(node["width"], "map.width");
  if (node["height"]) map.height = rd.positive(node["height"], "map.height");
  if (node["water_sources"]) {
    map.water_sources = rd.count(node["water_sources"], "map.water_sources");
    if (map.water_sources < 1) rd.fail(node["water_sources"], "map.water_sources: must be >= 1");
  }
  if (const auto coords = node["source_coordinates"]) {
    if (!coords.IsSequence() || coords.size() == 0) {
      rd.fail(coords, "map.source_coordinates: expected a nonempty list of [x, y]");
    }
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const auto p = rd.point(coords[k], "map.source_coordinates[" + std::to_string(k) + "]");
      if (p.x < 0 || p.x > map.width || p.y < 0 || p.y > map.height) {
        rd.fail(coords[k], "map.source_coordinates[" + std::to_string(k) + "]: outside the map");
      }
      map.source_coordinates.push_back(p);
    }
    if (node["water_sources"] && map.water_sources != map.source_coordinates.size()) {
      rd.fail(node["water_sources"], "map.water_sources disagrees with source_coordinates");
    }
    map.water_sources = map.source_coordinates.size();
  }
  if (const auto route = node["route"]; rd.section(route, "map.route")) {
    geometry::Route r = geometry::default_route(map.width, map.height);
    if (route["lower"]) r.lower = rd.point(route["lower"], "map.route.lower");
    if (route["upper"]) r.upper = rd.point(route["upper"], "map.route.upper");
    if (route["period_days"]) {
      r.period_s = rd.positive(route["period_days"], "map.route.period_days") * geometry::kSecondsPerDay;
    }
    if (!(r.lower.x <= r.upper.x && r.lower.y <= r.upper.y) || r.lower.x < 0 || r.lower.y < 0 ||
        r.upper.x > map.width || r.upper.y > map.height) {
      rd.fail(route, "map.route: lower/upper must span a rectangle inside the map");
    }
    map.route = r;
  }
  if (node["peer_range"]) map.peer_range = rd.positive(node["peer_range"], "map.peer_range");
  if (node["radio_range"]) map.radio_range = rd.nonnegative(node["radio_range"], "map.radio_range");
  if (const auto ranges = node["radio_ranges"]) {
    map.radio_ranges = rd.numbers(ranges, "map.radio_ranges");
    if (map.radio_ranges.empty()) rd.fail(ranges, "map.radio_ranges: must not be empty");
    for (double r : map.radio_ranges) {
      if (!(r >= 0.0)) rd.fail(ranges, "map.radio_ranges: entries must be >= 0");
    }
  }
  if (node["contact_lockout_minutes"]) {
    map.contact_lockout_minutes =
        rd.nonnegative(node["contact_lockout_minutes"], "map.contact_lockout_minutes");
  }
  if (node["randomize_layout"]) {
    map.randomize_layout = rd.boolean(node["randomize_layout"], "map.randomize_layout");
  }
}

void read_mode(const Reader& rd, const YAML::Node& node, const std::string& path,
               geometry::ModeParams& mode) {
  if (!rd.section(node, path)) return;
  if (node["speed"]) mode.speed = rd.nonnegative(node["speed"], path + ".speed");
  if (node["turn_interval_s"]) {
    mode.turn_interval_s = rd.positive(node["turn_interval_s"], path + ".turn_interval_s");
  }
}

void read_movement(const Reader& rd, const YAML::Node& node, geometry::MovementParams& mv) {
  if (!rd.section(node, "movement")) return;
  read_mode(rd, node["grazing"], "movement.grazing", mv.modes[0]);
  read_mode(rd, node["graze_walking"], "movement.graze_walking", mv.modes[1]);
  read_mode(rd, node["fast_moving"], "movement.fast_moving", mv.modes[2]);
  if (node["switching"] && node["switch_probability"]) {
    rd.fail(node["switch_probability"], "give either movement.switching or switch_probability");
  }
  if (const auto p = node["switch_probability"]) {
    const double q = rd.nonnegative(p, "movement.switch_probability");
    if (q > 1.0) rd.fail(p, "movement.switch_probability: must be <= 1");
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) mv.switching[a][b] = a == b ? 1.0 - q : q / 2.0;
    }
  }
  if (const auto sw = node["switching"]) {
    if (!sw.IsSequence() || sw.size() != 3) rd.fail(sw, "movement.switching: expected a 3x3 list");
    for (std::size_t a = 0; a < 3; ++a) {
      const auto row = rd.numbers(sw[a], "movement.switching[" + std::to_string(a) + "]");
      if (row.size() != 3) rd.fail(sw[a], "movement.switching rows need 3 entries");
      for (std::size_t b = 0; b < 3; ++b) mv.switching[a][b] = row[b];
    }
  }
  if (node["thirst_speed"]) mv.thirst_speed = rd.nonnegative(node["thirst_speed"], "movement.thirst_speed");
  if (node["decision_step_s"]) {
    mv.decision_step_s = rd.positive(node["decision_step_s"], "movement.decision_step_s");
  }
  if (const auto tod = node["thirst_time_of_day_s"]) {
    if (tod.IsScalar() && tod.Scalar() == "random") {
      mv.thirst_time_of_day_s.reset();
    } else {
      mv.thirst_time_of_day_s = rd.nonnegative(tod, "movement.thirst_time_of_day_s");
    }
  }
  try {
    mv.validate();
  } catch (const std::invalid_argument& e) {
    rd.fail(node, std::string("movement: ") + e.what());
  }
}

void read_model(const Reader& rd, const YAML::Node& node, ModelSection& model) {
  if (!rd.section(node, "model")) return;
  if (node["n_patches"]) {
    model.n_patches = rd.count(node["n_patches"], "model.n_patches");
    if (*model.n_patches < 1) rd.fail(node["n_patches"], "model.n_patches: must be >= 1");
  }
  if (node["population"]) {
    model.population = static_cast<Count>(rd.count(node["population"], "model.population"));
  }
  if (const auto p = node["placement"]) {
    const auto mode = rd.string(p, "model.placement");
    if (mode == "uniform_random") {
      model.placement = PlacementMode::uniform_random;
    } else if (mode == "even") {
      model.placement = PlacementMode::even;
    } else if (mode == "explicit") {
      model.placement = PlacementMode::explicit_counts;
    } else {
      rd.fail(p, "model.placement: expected uniform_random, even or explicit");
    }
  }
  if (const auto init = node["initial_population"]) {
    if (!init.IsSequence() || init.size() == 0) {
      rd.fail(init, "model.initial_population: expected a nonempty list of counts");
    }
    Count total = 0;
    for (std::size_t k = 0; k < init.size(); ++k) {
      const auto c = static_cast<Count>(
          rd.count(init[k], "model.initial_population[" + std::to_string(k) + "]"));
      model.initial_population.push_back(c);
      total += c;
    }
    if (node["population"] && total != model.population) {
      rd.fail(init, "model.initial_population must sum to model.population");
    }
    model.population = total;
    if (!node["placement"]) model.placement = PlacementMode::explicit_counts;
  }
  if (model.placement == PlacementMode::explicit_counts && model.initial_population.empty()) {
    rd.fail(node, "model.placement 'explicit' needs model.initial_population");
  }
  if (model.n_patches && !model.initial_population.empty() &&
      *model.n_patches != model.initial_population.size()) {
    rd.fail(node, "model.initial_population length differs from model.n_patches");
  }
  if (node["initial_age"]) model.initial_age = rd.nonnegative(node["initial_age"], "model.initial_age");
}

void read_simulation(const Reader& rd, const YAML::Node& node, SimulationSection& sim) {
  if (!rd.section(node, "simulation")) return;
  if (node["horizon"]) sim.horizon = rd.positive(node["horizon"], "simulation.horizon");
  if (node["sample_step"]) sim.sample_step = rd.positive(node["sample_step"], "simulation.sample_step");
  if (node["seed"]) sim.seed = rd.scalar<std::uint64_t>(node["seed"], "simulation.seed", "an unsigned integer");
  if (node["runs"]) {
    sim.runs = rd.count(node["runs"], "simulation.runs");
    if (sim.runs < 1) rd.fail(node["runs"], "simulation.runs: must be >= 1");
  }
  if (node["calibration_days"]) {
    sim.calibration_days = rd.positive(node["calibration_days"], "simulation.calibration_days");
    if (sim.calibration_days < 1.0) {
      rd.fail(node["calibration_days"], "simulation.calibration_days: must be >= 1");
    }
  }
  if (node["meanfield_step"]) {
    sim.meanfield_step = rd.positive(node["meanfield_step"], "simulation.meanfield_step");
  }
  if (node["event_log"]) sim.event_log = rd.boolean(node["event_log"], "simulation.event_log");
  if (const auto mode = node["r_mode"]) {
    const auto m = rd.string(mode, "simulation.r_mode");
    if (m == "horizon") {
      sim.r_mode = metrics::RMode::horizon;
    } else if (m == "time_average") {
      sim.r_mode = metrics::RMode::time_average;
    } else {
      rd.fail(mode, "simulation.r_mode: expected horizon or time_average");
    }
  }
  if (sim.meanfield_step > sim.horizon) {
    rd.fail(node, "simulation.meanfield_step must not exceed simulation.horizon");
  }
}

void read_output(const Reader& rd, const YAML::Node& node, OutputSection& out) {
  if (!rd.section(node, "output")) return;
  if (node["directory"]) out.directory = rd.string(node["directory"], "output.directory");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    rd.fail(e.mark, e.msg);
  }
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  rd.section(root, "");
  read_map(rd, root["map"], cfg.map);
  read_movement(rd, root["movement"], cfg.movement);
  read_model(rd, root["model"], cfg.model);
  read_simulation(rd, root["simulation"], cfg.simulation);
  read_output(rd, root["output"], cfg.output);

  if (cfg.model.n_patches && !cfg.map.source_coordinates.empty() &&
      *cfg.model.n_patches != cfg.map.source_coordinates.size()) {
    rd.fail(root["model"], "model.n_patches differs from the number of map.source_coordinates");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::vector<std::string> accepted_keys() {
  std::vector<std::string> keys;
  for (const auto& [path, names] : key_table()) {
    for (const auto& name : names) {
      const auto full = join(path, name);
      if (!key_table().contains(full)) keys.push_back(full);
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

io::Json to_json(const ExperimentConfig& cfg) {
  io::Json j;
  io::Json map;
  map["width"] = cfg.map.width;
  map["height"] = cfg.map.height;
  map["water_sources"] = cfg.map.water_sources;
  io::Json coords = io::Json::array();
  for (const auto& p : cfg.map.source_coordinates) coords.push_back(io::Json::array({p.x, p.y}));
  map["source_coordinates"] = std::move(coords);
  const auto route = cfg.map.route.value_or(geometry::default_route(cfg.map.width, cfg.map.height));
  map["route"] = {{"lower", {route.lower.x, route.lower.y}},
                  {"upper", {route.upper.x, route.upper.y}},
                  {"period_days", route.period_s / geometry::kSecondsPerDay}};
  map["peer_range"] = cfg.map.peer_range;
  map["radio_range"] = cfg.map.radio_range;
  map["radio_ranges"] = cfg.map.radio_ranges;
  map["contact_lockout_minutes"] = cfg.map.contact_lockout_minutes;
  map["randomize_layout"] = cfg.map.randomize_layout;
  j["map"] = std::move(map);

  io::Json movement = io::to_json(cfg.movement);
  movement["decision_step_s"] = cfg.movement.decision_step_s;
  j["movement"] = std::move(movement);

  io::Json model;
  if (cfg.model.n_patches) {
    model["n_patches"] = *cfg.model.n_patches;
  } else {
    model["n_patches"] = nullptr;
  }
  model["population"] = cfg.model.population;
  model["placement"] = cfg.model.placement == PlacementMode::uniform_random ? "uniform_random"
                       : cfg.model.placement == PlacementMode::even         ? "even"
                                                                            : "explicit";
  model["initial_population"] = cfg.model.initial_population;
  model["initial_age"] = cfg.model.initial_age;
  j["model"] = std::move(model);

  j["simulation"] = {{"horizon", cfg.simulation.horizon},
                     {"sample_step", cfg.simulation.sample_step},
                     {"seed", cfg.simulation.seed},
                     {"runs", cfg.simulation.runs},
                     {"calibration_days", cfg.simulation.calibration_days},
                     {"meanfield_step", cfg.simulation.meanfield_step},
                     {"event_log", cfg.simulation.event_log},
                     {"r_mode", cfg.simulation.r_mode == metrics::RMode::horizon ? "horizon"
                                                                                 : "time_average"}};
  j["output"] = {{"directory", cfg.output.directory}};
  j["rng"] = std::string(kRngAlgorithm);
  return j;
}

geometry::WorldMap build_map(const ExperimentConfig& cfg) {
  geometry::WorldMap map;
  map.width = cfg.map.width;
  map.height = cfg.map.height;
  map.base_route = cfg.map.route.value_or(geometry::default_route(map.width, map.height));
  map.peer_range = cfg.map.peer_range;
  map.radio_range = cfg.map.radio_range;
  map.contact_lockout_s = cfg.map.contact_lockout_minutes * 60.0;
  if (!cfg.map.source_coordinates.empty()) {
    map.water_sources = cfg.map.source_coordinates;
  } else {
    Rng rng(derive_seed(cfg.simulation.seed, streams::layout));
    map = geometry::with_random_sources(map, cfg.map.water_sources, rng);
  }
  map.validate();
  return map;
}

PatchModel build_model(const ExperimentConfig& cfg, const RateParameters& rates) {
  const std::size_t n = rates.size();
  if (cfg.model.n_patches && *cfg.model.n_patches != n) {
    throw ConfigError("model.n_patches is " + std::to_string(*cfg.model.n_patches) +
                      " but the rates describe " + std::to_string(n) + " patches");
  }
  PatchModel model;
  model.n_patches = n;
  model.rates = rates;
  model.initial_age = cfg.model.initial_age;
  if (cfg.model.placement == PlacementMode::explicit_counts) {
    if (cfg.model.initial_population.size() != n) {
      throw ConfigError("model.initial_population has " +
                        std::to_string(cfg.model.initial_population.size()) + " entries, rates have " +
                        std::to_string(n) + " patches");
    }
    model.initial_population = cfg.model.initial_population;
  } else {
    model.initial_population = metrics::even_population(cfg.model.population, n);
  }
  model.validate();
  return model;
}

std::vector<double> expected_initial_population(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.model.placement == PlacementMode::uniform_random) {
    return std::vector<double>(n, static_cast<double>(cfg.model.population) / static_cast<double>(n));
  }
  PatchModel model = build_model(cfg, RateParameters::zeros(n));
  return {model.initial_population.begin(), model.initial_population.end()};
}

}  // namespace patchsim::config
