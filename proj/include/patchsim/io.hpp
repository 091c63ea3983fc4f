#pragma once

// File formats: trajectory CSV (shared by stochastic runs, ensemble means and
// the mean-field integrator) and JSON documents for calibration results.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchsim/geometry.hpp"
#include "patchsim/layout.hpp"
#include "patchsim/model.hpp"

namespace patchsim::io {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits (round-trips exactly), locale independent.
std::string format_double(double value);

/// Header `t,N_0,...,A_0,...,A_0_1,...`, one row per sample. Each comment
/// line is written first, prefixed with "# ".
void write_trajectory_csv(std::ostream& out, const RealTrajectory& trajectory,
                          std::span<const std::string> comments = {});

struct CsvTrajectory {
  std::vector<std::string> comments;
  std::vector<std::string> columns;  ///< without "t"
  RealTrajectory data;
};

/// Parses a trajectory CSV; '#' lines are collected as comments. Throws
/// FormatError with the offending line number.
CsvTrajectory read_trajectory_csv(std::istream& in);
CsvTrajectory read_trajectory_csv(const std::filesystem::path& path);

Json to_json(const RateParameters& rates);
RateParameters rates_from_json(const Json& j);

Json to_json(const geometry::WorldMap& map);
Json to_json(const geometry::MovementParams& params);
Json to_json(const geometry::CalibrationResult& result);

/// Reads the "rates" object of a calibration (or hand-written rates) file.
RateParameters load_rates(const std::filesystem::path& path);

/// Writes via a temporary sibling file and renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace patchsim::io
