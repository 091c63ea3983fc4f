#pragma once

// Experiment configuration. The on-disk format is YAML (JSON documents are
// accepted too, being valid YAML); the published schema lives in
// schema/experiment.schema.json. Unknown keys are rejected with the line and
// column where they appear.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchsim/geometry.hpp"
#include "patchsim/io.hpp"
#include "patchsim/metrics.hpp"
#include "patchsim/model.hpp"

namespace patchsim::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PlacementMode { uniform_random, even, explicit_counts };

struct MapSection {
  double width = 20000.0;
  double height = 20000.0;
  std::size_t water_sources = 10;
  std::vector<geometry::Point> source_coordinates;  ///< overrides the random layout
  std::optional<geometry::Route> route;              ///< default: inset 25%, one lap per day
  double peer_range = 100.0;
  double radio_range = 1000.0;
  std::vector<double> radio_ranges{1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000};
  double contact_lockout_minutes = 30.0;
  bool randomize_layout = true;  ///< sweep: new water-source layout per run
};

struct ModelSection {
  std::optional<std::size_t> n_patches;
  Count population = 50;
  PlacementMode placement = PlacementMode::uniform_random;
  std::vector<Count> initial_population;  ///< explicit_counts only
  double initial_age = 0.0;
};

struct SimulationSection {
  double horizon = 90.0;
  double sample_step = 0.1;
  std::uint64_t seed = 1;
  std::size_t runs = 20;
  double calibration_days = 365.0;
  double meanfield_step = 0.01;
  bool event_log = false;
  metrics::RMode r_mode = metrics::RMode::horizon;
};

struct OutputSection {
  std::string directory = "out";
};

struct ExperimentConfig {
  MapSection map;
  geometry::MovementParams movement;
  ModelSection model;
  SimulationSection simulation;
  OutputSection output;
};

/// `source` names the document in diagnostics ("file:line:col: ...").
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every accepted key as a dotted path, e.g. "map.width", "movement.grazing.speed".
std::vector<std::string> accepted_keys();

/// Fully resolved configuration, for embedding in output files.
io::Json to_json(const ExperimentConfig& cfg);

/// World map: explicit coordinates if given, otherwise sources drawn from the
/// layout stream of `seed`.
geometry::WorldMap build_map(const ExperimentConfig& cfg);

/// Patch model for n patches and the given rates, honouring the placement mode.
PatchModel build_model(const ExperimentConfig& cfg, const RateParameters& rates);

/// Real-valued starting population for the mean-field model (the expected
/// value of the stochastic placement).
std::vector<double> expected_initial_population(const ExperimentConfig& cfg, std::size_t n);

}  // namespace patchsim::config
