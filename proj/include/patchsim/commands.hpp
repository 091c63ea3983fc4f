#pragma once

// Batch commands behind the `patchsim` executable. Each returns a process
// exit code and reports to the given streams; nothing is written to disk
// until every input has been read and validated.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patchsim/layout.hpp"

namespace patchsim::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_config_error = 2,     ///< bad config, rates or CSV input, bad flags
  exit_runtime_error = 3,    ///< failure while running (integration, I/O, failed sweep runs)
  exit_threshold_failed = 4, ///< compare: deviation above --threshold
};

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> rates;
  std::optional<std::filesystem::path> out;  ///< overrides output.directory
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  int jobs = 0;  ///< 0: OpenMP default
  bool dry_run = false;
};

enum class ColumnGroup { all, population, base_age, patch_age };

struct CompareOptions {
  std::filesystem::path stochastic;
  std::filesystem::path meanfield;
  std::optional<double> threshold;  ///< max-abs deviation allowed in any compared column
  ColumnGroup group = ColumnGroup::all;
  std::optional<std::filesystem::path> out;  ///< directory for compare.json
};

int cmd_calibrate(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_meanfield(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err);

struct ColumnDeviation {
  std::string column;
  double max_abs = 0.0;
  double l2 = 0.0;  ///< root mean square over the grid
};

/// Column-wise deviations of b from a. Throws io::FormatError when the column
/// sets or the time grids differ.
std::vector<ColumnDeviation> compare_trajectories(const RealTrajectory& a, const RealTrajectory& b,
                                                  ColumnGroup group = ColumnGroup::all);

}  // namespace patchsim::cli
