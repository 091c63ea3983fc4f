#include "patchsim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>

#include "patchsim/config.hpp"
#include "patchsim/geometry.hpp"
#include "patchsim/io.hpp"
#include "patchsim/meanfield.hpp"
#include "patchsim/metrics.hpp"
#include "patchsim/rng.hpp"
#include "patchsim/ssa.hpp"

namespace patchsim::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

// Keeps the RK4 amplification inside its real-axis stability interval.
constexpr double kStableStepRate = 2.5;

using OutputFiles = std::vector<std::pair<fs::path, std::string>>;

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const io::FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime_error;
  }
}

config::ExperimentConfig resolve(const Options& opt) {
  config::ExperimentConfig cfg = opt.config ? config::load_config(*opt.config) : config::ExperimentConfig{};
  if (opt.seed) cfg.simulation.seed = *opt.seed;
  if (opt.runs) {
    if (*opt.runs < 1) throw config::ConfigError("--runs must be >= 1");
    cfg.simulation.runs = *opt.runs;
  }
  if (opt.out) cfg.output.directory = opt.out->string();
  if (opt.jobs < 0) throw config::ConfigError("--jobs must be >= 0");
  return cfg;
}

RateParameters require_rates(const Options& opt, const char* command) {
  if (!opt.rates) throw config::ConfigError(std::string(command) + " needs --rates");
  return io::load_rates(*opt.rates);
}

std::vector<std::string> header(const std::string& command, const config::ExperimentConfig& cfg) {
  return {"patchsim " + command, "config: " + config::to_json(cfg).dump(),
          "seed: " + std::to_string(cfg.simulation.seed), "rng: " + std::string(kRngAlgorithm)};
}

std::string trajectory_csv(const RealTrajectory& traj, const std::vector<std::string>& comments) {
  std::ostringstream ss;
  io::write_trajectory_csv(ss, traj, comments);
  return ss.str();
}

std::string run_name(const char* stem, std::size_t k, const char* ext) {
  std::ostringstream ss;
  ss << stem << '_' << std::setw(3) << std::setfill('0') << k << ext;
  return ss.str();
}

void write_outputs(const OutputFiles& files, std::ostream& out) {
  for (const auto& [path, content] : files) {
    io::write_file_atomic(path, content);
    out << "wrote " << path.string() << '\n';
  }
}

Placement placement_of(const config::ExperimentConfig& cfg) {
  return cfg.model.placement == config::PlacementMode::uniform_random ? Placement::uniform_random
                                                                      : Placement::fixed;
}

const char* r_mode_name(metrics::RMode mode) {
  return mode == metrics::RMode::horizon ? "horizon" : "time_average";
}

}  // namespace

int cmd_calibrate(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve(opt);
    geometry::WorldMap map = config::build_map(cfg);
    map.radio_range = cfg.map.radio_range;
    const std::uint64_t seed = derive_seed(cfg.simulation.seed, streams::calibration);
    const fs::path dir = cfg.output.directory;
    if (opt.dry_run) {
      out << "plan: calibrate " << map.water_sources.size() << " patches over "
          << cfg.simulation.calibration_days << " days, radio range " << map.radio_range
          << " m\nplan: write " << (dir / "calibration.json").string() << '\n';
      return exit_ok;
    }
    const auto result = geometry::calibrate(map, cfg.movement, cfg.simulation.calibration_days, seed);
    if (result.no_events) err << "warning: no contacts or migrations observed; all rates are zero\n";
    Json doc;
    doc["command"] = "calibrate";
    doc["config"] = config::to_json(cfg);
    doc["seed"] = cfg.simulation.seed;
    doc["rng"] = std::string(kRngAlgorithm);
    doc["map"] = io::to_json(map);
    doc["movement"] = io::to_json(cfg.movement);
    doc["calibration"] = io::to_json(result);
    write_outputs({{dir / "calibration.json", doc.dump(2) + "\n"}}, out);
    return exit_ok;
  });
}

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve(opt);
    const RateParameters rates = require_rates(opt, "simulate");
    const PatchModel model = config::build_model(cfg, rates);
    const auto& sim = cfg.simulation;
    SimulationConfig sc;
    sc.horizon = sim.horizon;
    sc.sample_times = uniform_grid(sim.horizon, sim.sample_step);
    sc.seed = derive_seed(sim.seed, streams::ensemble);
    sc.placement = placement_of(cfg);
    sc.record_events = sim.event_log;
    sc.validate();
    const fs::path dir = cfg.output.directory;
    if (opt.dry_run) {
      out << "plan: simulate " << sim.runs << " runs of " << model.n_patches << " patches, "
          << model.population() << " zebras, horizon " << sim.horizon << " days, "
          << sc.sample_times.size() << " samples per run\n"
          << "plan: write " << sim.runs << " run CSVs, mean.csv and report.json to " << dir.string()
          << '\n';
      return exit_ok;
    }

    const auto runs = run_ensemble(model, sc, sim.runs, opt.jobs);

    auto comments = header("simulate", cfg);
    comments.push_back("rates: " + io::to_json(rates).dump());
    OutputFiles files;
    std::vector<double> R;
    Json names = Json::array();
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto name = run_name("run", k, ".csv");
      files.emplace_back(dir / name, trajectory_csv(runs[k].to_real(), comments));
      names.push_back(name);
      R.push_back(metrics::run_delivery_rate(runs[k], sim.r_mode));
      if (sim.event_log) {
        std::ostringstream ev;
        for (const auto& c : comments) ev << "# " << c << '\n';
        ev << "t,event,i,j\n";
        for (const auto& e : runs[k].events) {
          ev << io::format_double(e.t) << ',' << to_string(e.event.kind) << ',' << e.event.i << ','
             << e.event.j << '\n';
        }
        files.emplace_back(dir / run_name("events", k, ".csv"), ev.str());
      }
    }
    files.emplace_back(dir / "mean.csv",
                       trajectory_csv(metrics::ensemble_mean(runs, sc.sample_times), comments));

    const auto summary = metrics::summarize(R);
    Json report;
    report["command"] = "simulate";
    report["config"] = config::to_json(cfg);
    report["seed"] = sim.seed;
    report["rng"] = std::string(kRngAlgorithm);
    report["rates"] = io::to_json(rates);
    report["runs"] = runs.size();
    report["r_mode"] = r_mode_name(sim.r_mode);
    report["horizon"] = sim.horizon;
    report["mean_R"] = summary.mean;
    report["std_R"] = summary.stddev;
    report["per_run_R"] = R;
    report["files"] = std::move(names);
    files.emplace_back(dir / "report.json", report.dump(2) + "\n");
    write_outputs(files, out);
    out << "R = " << io::format_double(summary.mean) << " +- " << io::format_double(summary.stddev)
        << " over " << runs.size() << " runs\n";
    return exit_ok;
  });
}

int cmd_meanfield(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve(opt);
    const RateParameters rates = require_rates(opt, "meanfield");
    const PatchModel model = config::build_model(cfg, rates);
    const auto& sim = cfg.simulation;
    const auto N0 = config::expected_initial_population(cfg, model.n_patches);
    const auto grid = uniform_grid(sim.horizon, sim.sample_step);

    double step = sim.meanfield_step;
    const double stiffness = meanfield::stiffness_bound(meanfield::initial_state(model, N0), rates);
    if (step * stiffness > kStableStepRate) {
      const double parts = std::ceil(step * stiffness / kStableStepRate);
      step /= parts;
      err << "note: meanfield_step reduced to " << io::format_double(step)
          << " for RK4 stability (fastest reset rate " << io::format_double(stiffness) << "/day)\n";
    }
    const fs::path dir = cfg.output.directory;
    if (opt.dry_run) {
      out << "plan: integrate " << model.n_patches << " patches to " << sim.horizon
          << " days with RK4 step " << io::format_double(step) << ", " << grid.size() << " samples\n"
          << "plan: write " << (dir / "meanfield.csv").string() << '\n';
      return exit_ok;
    }
    const auto traj = meanfield::integrate(model, N0, sim.horizon, step, grid);
    auto comments = header("meanfield", cfg);
    comments.push_back("rates: " + io::to_json(rates).dump());
    comments.push_back("rk4_step: " + io::format_double(step));
    write_outputs({{dir / "meanfield.csv", trajectory_csv(traj, comments)}}, out);
    return exit_ok;
  });
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve(opt);
    if (cfg.model.placement == config::PlacementMode::explicit_counts) {
      throw config::ConfigError("sweep does not support model.placement 'explicit'");
    }
    const geometry::WorldMap map = config::build_map(cfg);
    metrics::SweepOptions so;
    so.population = cfg.model.population;
    so.horizon = cfg.simulation.horizon;
    so.sample_step = cfg.simulation.sample_step;
    so.calibration_days = cfg.simulation.calibration_days;
    so.runs = cfg.simulation.runs;
    so.seed = cfg.simulation.seed;
    so.randomize_layout = cfg.map.randomize_layout && cfg.map.source_coordinates.empty();
    so.source_count = cfg.map.water_sources;
    so.placement = placement_of(cfg);
    so.r_mode = cfg.simulation.r_mode;
    so.jobs = opt.jobs;
    const auto& ranges = cfg.map.radio_ranges;
    const fs::path dir = cfg.output.directory;
    if (opt.dry_run) {
      out << "plan: sweep " << ranges.size() << " radio ranges:";
      for (double r : ranges) out << ' ' << r;
      out << "\nplan: " << so.runs << " runs per range, "
          << (so.randomize_layout ? "fresh water-source layout per run" : "fixed layout") << ", "
          << so.calibration_days << "-day calibration per run, horizon " << so.horizon << " days\n"
          << "plan: " << so.runs * ranges.size() << " simulations, R at "
          << r_mode_name(so.r_mode) << '\n'
          << "plan: write sweep.csv and sweep.json to " << dir.string() << '\n';
      return exit_ok;
    }

    const auto rows = metrics::sweep_radio_range(map, cfg.movement, ranges, so);

    std::ostringstream csv;
    for (const auto& c : header("sweep", cfg)) csv << "# " << c << '\n';
    csv << "range_m,mean_R,std_R,runs\n";
    Json table = Json::array();
    bool complete = true;
    for (const auto& row : rows) {
      csv << io::format_double(row.range_m) << ',' << io::format_double(row.mean_R) << ','
          << io::format_double(row.std_R) << ',' << row.runs << '\n';
      Json r;
      r["range_m"] = row.range_m;
      r["mean_R"] = row.mean_R;
      r["std_R"] = row.std_R;
      r["runs"] = row.runs;
      r["complete"] = row.complete;
      if (!row.complete) r["error"] = row.error;
      r["per_run_R"] = row.per_run_R;
      table.push_back(std::move(r));
      if (!row.complete) {
        complete = false;
        err << "range " << row.range_m << ": " << so.runs - row.runs << " runs failed: " << row.error
            << '\n';
      }
    }
    Json report;
    report["command"] = "sweep";
    report["config"] = config::to_json(cfg);
    report["seed"] = cfg.simulation.seed;
    report["rng"] = std::string(kRngAlgorithm);
    report["complete"] = complete;
    report["rows"] = std::move(table);
    write_outputs({{dir / "sweep.csv", csv.str()}, {dir / "sweep.json", report.dump(2) + "\n"}}, out);
    return complete ? exit_ok : exit_runtime_error;
  });
}

std::vector<ColumnDeviation> compare_trajectories(const RealTrajectory& a, const RealTrajectory& b,
                                                  ColumnGroup group) {
  if (a.n_patches != b.n_patches) {
    throw io::FormatError("column sets differ: " + std::to_string(a.n_patches) + " vs " +
                          std::to_string(b.n_patches) + " patches");
  }
  if (a.times.size() != b.times.size()) {
    throw io::FormatError("time grids differ: " + std::to_string(a.times.size()) + " vs " +
                          std::to_string(b.times.size()) + " samples");
  }
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    if (std::abs(a.times[k] - b.times[k]) > 1e-9 * std::max(1.0, std::abs(a.times[k]))) {
      throw io::FormatError("time grids differ at sample " + std::to_string(k) + ": " +
                            io::format_double(a.times[k]) + " vs " + io::format_double(b.times[k]));
    }
  }
  const StateLayout layout(a.n_patches);
  const auto names = layout.column_names();
  const std::size_t n = a.n_patches;
  std::size_t first = 0;
  std::size_t last = layout.size();
  switch (group) {
    case ColumnGroup::all: break;
    case ColumnGroup::population: last = n; break;
    case ColumnGroup::base_age: first = n; last = 2 * n; break;
    case ColumnGroup::patch_age: first = 2 * n; break;
  }
  std::vector<ColumnDeviation> out;
  for (std::size_t c = first; c < last; ++c) {
    ColumnDeviation d{names[c], 0.0, 0.0};
    for (std::size_t k = 0; k < a.times.size(); ++k) {
      const double diff = std::abs(a.states[k][c] - b.states[k][c]);
      d.max_abs = std::max(d.max_abs, diff);
      d.l2 += diff * diff;
    }
    if (!a.times.empty()) d.l2 = std::sqrt(d.l2 / static_cast<double>(a.times.size()));
    out.push_back(std::move(d));
  }
  return out;
}

int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.threshold && !(*opt.threshold >= 0.0)) {
      throw config::ConfigError("--threshold must be >= 0");
    }
    const auto a = io::read_trajectory_csv(opt.stochastic);
    const auto b = io::read_trajectory_csv(opt.meanfield);
    const auto devs = compare_trajectories(a.data, b.data, opt.group);

    double worst = 0.0;
    std::string worst_column;
    double l2_max = 0.0;
    out << "column,max_abs,l2\n";
    for (const auto& d : devs) {
      out << d.column << ',' << io::format_double(d.max_abs) << ',' << io::format_double(d.l2) << '\n';
      if (d.max_abs > worst || worst_column.empty()) {
        worst = d.max_abs;
        worst_column = d.column;
      }
      l2_max = std::max(l2_max, d.l2);
    }
    const bool pass = !opt.threshold || worst <= *opt.threshold;
    out << "# max_abs " << io::format_double(worst) << " (" << worst_column << "), largest l2 "
        << io::format_double(l2_max);
    if (opt.threshold) out << ", threshold " << io::format_double(*opt.threshold) << (pass ? " PASS" : " FAIL");
    out << '\n';

    if (opt.out) {
      Json report;
      report["command"] = "compare";
      report["stochastic"] = fs::absolute(opt.stochastic).string();
      report["meanfield"] = fs::absolute(opt.meanfield).string();
      report["stochastic_header"] = a.comments;
      report["meanfield_header"] = b.comments;
      Json cols = Json::array();
      for (const auto& d : devs) cols.push_back({{"column", d.column}, {"max_abs", d.max_abs}, {"l2", d.l2}});
      report["columns"] = std::move(cols);
      report["max_abs"] = worst;
      if (opt.threshold) {
        report["threshold"] = *opt.threshold;
      } else {
        report["threshold"] = nullptr;
      }
      report["pass"] = pass;
      write_outputs({{*opt.out / "compare.json", report.dump(2) + "\n"}}, out);
    }
    if (!pass) {
      err << "deviation " << io::format_double(worst) << " in " << worst_column << " exceeds threshold\n";
      return exit_threshold_failed;
    }
    return exit_ok;
  });
}

}  // namespace patchsim::cli
