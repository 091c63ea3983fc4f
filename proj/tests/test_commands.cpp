#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "patchsim/commands.hpp"
#include "patchsim/io.hpp"

using namespace patchsim;
using namespace patchsim::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = PATCHSIM_SOURCE_DIR;

struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name)
      : dir(fs::temp_directory_path() / ("patchsim_test_cmd_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  fs::path file(const std::string& name, const std::string& content) const {
    io::write_file_atomic(dir / name, content);
    return dir / name;
  }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

template <class F, class O>
Result run(F command, const O& opt) {
  std::ostringstream out, err;
  const int code = command(opt, out, err);
  return {code, out.str(), err.str()};
}

Options options(const fs::path& config, const fs::path& out) {
  Options o;
  o.config = config;
  o.out = out;
  return o;
}

io::Json read_json(const fs::path& p) { return io::Json::parse(io::read_file(p)); }

// Ten fixed sources, short calibration, for fast end-to-end runs.
const char* kTenPatch = R"(
map:
  source_coordinates: [[2000, 3000], [6000, 15000], [10000, 10000], [14000, 4000], [18000, 17000],
                       [3000, 12000], [8000, 6000], [12000, 18000], [16000, 9000], [5000, 18500]]
  radio_range: 2000
  radio_ranges: [2000]
simulation:
  calibration_days: 60
  horizon: 90
  runs: 3
  seed: 11
)";

}  // namespace

TEST_CASE("calibrate writes ten alphas and 10x10 matrices") {
  Sandbox box("calibrate");
  const auto cfg = box.file("c.yaml", "simulation:\n  calibration_days: 30\n");
  const auto r = run(cmd_calibrate, options(cfg, box.dir / "a"));
  REQUIRE(r.code == exit_ok);
  const auto doc = read_json(box.dir / "a" / "calibration.json");
  const auto& rates = doc["calibration"]["rates"];
  CHECK(rates["alpha"].size() == 10);
  CHECK(rates["beta"].size() == 10);
  CHECK(rates["gamma"][9].size() == 10);
  CHECK(doc["seed"] == 1);
  CHECK(doc["rng"] == "mt19937_64");
  CHECK(doc["config"]["simulation"]["calibration_days"] == 30.0);
  CHECK(io::load_rates(box.dir / "a" / "calibration.json").size() == 10);

  SUBCASE("same seed twice gives identical bytes") {
    REQUIRE(run(cmd_calibrate, options(cfg, box.dir / "b")).code == exit_ok);
    fs::rename(box.dir / "b" / "calibration.json", box.dir / "first.json");
    REQUIRE(run(cmd_calibrate, options(cfg, box.dir / "b")).code == exit_ok);
    CHECK(io::read_file(box.dir / "first.json") == io::read_file(box.dir / "b" / "calibration.json"));
  }
}

TEST_CASE("zero radio range gives zero alphas in the file") {
  Sandbox box("calibrate0");
  const auto cfg = box.file("c.yaml", "map:\n  radio_range: 0\nsimulation:\n  calibration_days: 10\n");
  REQUIRE(run(cmd_calibrate, options(cfg, box.dir)).code == exit_ok);
  for (const auto& a : read_json(box.dir / "calibration.json")["calibration"]["rates"]["alpha"]) {
    CHECK(a.get<double>() == 0.0);
  }
}

TEST_CASE("config errors exit with the config code and a position") {
  Sandbox box("badconfig");
  const auto cfg = box.file("c.yaml", "map:\n  widht: 3\n");
  const auto r = run(cmd_calibrate, options(cfg, box.dir / "out"));
  CHECK(r.code == exit_config_error);
  CHECK(r.err.find("c.yaml:2:3: unknown key 'map.widht'") != std::string::npos);
  CHECK_FALSE(fs::exists(box.dir / "out"));
}

TEST_CASE("simulate: one run gives identical run and mean files") {
  Sandbox box("sim1");
  const auto cfg = box.file("c.yaml", "simulation:\n  runs: 1\n  horizon: 10\n");
  Options o = options(cfg, box.dir);
  o.rates = kSource / "configs" / "single_patch_rates.json";
  const auto r = run(cmd_simulate, o);
  REQUIRE(r.code == exit_ok);
  CHECK(io::read_file(box.dir / "run_000.csv") == io::read_file(box.dir / "mean.csv"));
  CHECK_FALSE(fs::exists(box.dir / "run_001.csv"));
  const auto csv = io::read_trajectory_csv(box.dir / "mean.csv");
  CHECK(csv.data.times.size() == 101);
  CHECK(csv.comments.at(0) == "patchsim simulate");
  CHECK(csv.comments.at(1).rfind("config: {", 0) == 0);
  CHECK(csv.comments.at(2) == "seed: 1");
  CHECK(csv.comments.at(3) == "rng: mt19937_64");
}

TEST_CASE("simulate: twenty 90-day runs and a delivery report") {
  Sandbox box("sim20");
  const auto cfg = box.file("c.yaml", kTenPatch);
  REQUIRE(run(cmd_calibrate, options(cfg, box.dir / "cal")).code == exit_ok);
  Options o = options(cfg, box.dir / "sim");
  o.rates = box.dir / "cal" / "calibration.json";
  o.runs = 20;
  const auto r = run(cmd_simulate, o);
  REQUIRE(r.code == exit_ok);
  for (int k = 0; k < 20; ++k) {
    std::ostringstream name;
    name << "run_" << (k < 10 ? "00" : "0") << k << ".csv";
    CHECK(fs::exists(box.dir / "sim" / name.str()));
  }
  CHECK_FALSE(fs::exists(box.dir / "sim" / "run_020.csv"));
  const auto report = read_json(box.dir / "sim" / "report.json");
  CHECK(report["runs"] == 20);
  CHECK(report["per_run_R"].size() == 20);
  CHECK(report["mean_R"].get<double>() > 0.0);
  CHECK(report["mean_R"].get<double>() <= 1.0);
  CHECK(report["std_R"].get<double>() >= 0.0);
  CHECK(report["config"]["simulation"]["runs"] == 20);
  CHECK(r.out.find("R = ") != std::string::npos);
}

TEST_CASE("simulate: bad or missing rates leave no output behind") {
  Sandbox box("simbad");
  const auto cfg = box.file("c.yaml", "simulation:\n  runs: 2\n");
  Options o = options(cfg, box.dir / "out");
  CHECK(run(cmd_simulate, o).code == exit_config_error);  // no --rates
  o.rates = box.file("bad.json", "{\"rates\": {\"alpha\": [1, 2], \"beta\": [[0]], \"gamma\": [[0]]}}");
  const auto r = run(cmd_simulate, o);
  CHECK(r.code == exit_config_error);
  CHECK(r.err.find("bad.json") != std::string::npos);
  o.rates = box.dir / "missing.json";
  CHECK(run(cmd_simulate, o).code == exit_config_error);
  CHECK_FALSE(fs::exists(box.dir / "out"));
}

TEST_CASE("simulate: event log") {
  Sandbox box("simlog");
  const auto cfg = box.file("c.yaml", "simulation:\n  runs: 1\n  horizon: 2\n  event_log: true\n");
  Options o = options(cfg, box.dir);
  o.rates = kSource / "configs" / "single_patch_rates.json";
  REQUIRE(run(cmd_simulate, o).code == exit_ok);
  const auto log = io::read_file(box.dir / "events_000.csv");
  CHECK(log.find("t,event,i,j\n") != std::string::npos);
  CHECK(log.find(",BaseContact,0,0\n") != std::string::npos);
}

TEST_CASE("meanfield: deterministic and converging to 1/(alpha N)") {
  Sandbox box("mf");
  const auto cfg = kSource / "configs" / "single_patch.yaml";
  Options o = options(cfg, box.dir / "a");
  o.rates = kSource / "configs" / "single_patch_rates.json";
  REQUIRE(run(cmd_meanfield, o).code == exit_ok);
  const auto first = io::read_file(box.dir / "a" / "meanfield.csv");
  REQUIRE(run(cmd_meanfield, o).code == exit_ok);
  CHECK(io::read_file(box.dir / "a" / "meanfield.csv") == first);
  const auto traj = io::read_trajectory_csv(box.dir / "a" / "meanfield.csv").data;
  CHECK(traj.times.back() == 100.0);
  CHECK(std::abs(traj.states.back()[1] - 0.2) < 1e-9);
  for (const auto& s : traj.states) CHECK(s[0] == 50.0);
}

TEST_CASE("meanfield: no migration keeps N columns constant") {
  Sandbox box("mfgamma");
  io::Json rates;
  rates["alpha"] = {0.1, 0.2, 0.3};
  rates["beta"] = {{0, 0.01, 0.02}, {0.01, 0, 0.03}, {0.02, 0.03, 0}};
  rates["gamma"] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  Options o = options(box.file("c.yaml", "model:\n  population: 30\n"), box.dir);
  o.rates = box.file("r.json", rates.dump());
  REQUIRE(run(cmd_meanfield, o).code == exit_ok);
  for (const auto& s : io::read_trajectory_csv(box.dir / "meanfield.csv").data.states) {
    CHECK(s[0] == 10.0);
    CHECK(s[1] == 10.0);
    CHECK(s[2] == 10.0);
  }
}

TEST_CASE("meanfield: step is reduced for stiff rates") {
  Sandbox box("mfstiff");
  io::Json rates;
  rates["alpha"] = {40.0};
  rates["beta"] = {{0}};
  rates["gamma"] = {{0}};
  Options o = options(box.file("c.yaml", "simulation:\n  horizon: 1\n"), box.dir);
  o.rates = box.file("r.json", rates.dump());
  const auto r = run(cmd_meanfield, o);
  REQUIRE(r.code == exit_ok);
  CHECK(r.err.find("meanfield_step reduced") != std::string::npos);
  const auto traj = io::read_trajectory_csv(box.dir / "meanfield.csv").data;
  CHECK(std::abs(traj.states.back()[1] - 1.0 / 2000.0) < 1e-9);
}

TEST_CASE("compare") {
  Sandbox box("compare");
  const auto cfg = box.file("c.yaml", "simulation:\n  runs: 4\n  horizon: 5\n");
  Options o = options(cfg, box.dir);
  o.rates = kSource / "configs" / "single_patch_rates.json";
  REQUIRE(run(cmd_simulate, o).code == exit_ok);
  REQUIRE(run(cmd_meanfield, o).code == exit_ok);

  SUBCASE("a file against itself has zero deviation") {
    CompareOptions c{box.dir / "mean.csv", box.dir / "mean.csv", 0.0, ColumnGroup::all, box.dir};
    const auto r = run(cmd_compare, c);
    CHECK(r.code == exit_ok);
    const auto doc = read_json(box.dir / "compare.json");
    for (const auto& col : doc["columns"]) {
      CHECK(col["max_abs"] == 0.0);
      CHECK(col["l2"] == 0.0);
    }
    CHECK(doc["pass"] == true);
  }
  SUBCASE("threshold failure has its own exit code") {
    CompareOptions c{box.dir / "mean.csv", box.dir / "meanfield.csv", 1e-6, ColumnGroup::base_age, {}};
    const auto r = run(cmd_compare, c);
    CHECK(r.code == exit_threshold_failed);
    CHECK(r.out.find("A_0,") != std::string::npos);
    CHECK(r.out.find("N_0,") == std::string::npos);
    c.threshold = 10.0;
    CHECK(run(cmd_compare, c).code == exit_ok);
  }
  SUBCASE("different grids are a hard error") {
    const auto other = box.file("o.yaml", "simulation:\n  runs: 1\n  horizon: 5\n  sample_step: 0.5\n");
    Options o2 = options(other, box.dir / "coarse");
    o2.rates = o.rates;
    REQUIRE(run(cmd_meanfield, o2).code == exit_ok);
    CompareOptions c{box.dir / "mean.csv", box.dir / "coarse" / "meanfield.csv", {}, ColumnGroup::all, {}};
    const auto r = run(cmd_compare, c);
    CHECK(r.code == exit_config_error);
    CHECK(r.err.find("time grids differ") != std::string::npos);
  }
  SUBCASE("different column sets are a hard error") {
    const auto csv = box.file("two.csv", "t,N_0,N_1,A_0,A_1,A_0_1,A_1_0\n0,1,1,0,0,0,0\n");
    CompareOptions c{box.dir / "mean.csv", csv, {}, ColumnGroup::all, {}};
    CHECK(run(cmd_compare, c).code == exit_config_error);
  }
}

TEST_CASE("compare_trajectories deviations") {
  RealTrajectory a{1, {0.0, 1.0}, {{1.0, 0.0}, {1.0, 1.0}}};
  RealTrajectory b{1, {0.0, 1.0}, {{1.0, 3.0}, {1.0, 5.0}}};
  const auto d = compare_trajectories(a, b);
  REQUIRE(d.size() == 2);
  CHECK(d[0].max_abs == 0.0);
  CHECK(d[1].column == "A_0");
  CHECK(d[1].max_abs == 4.0);
  CHECK(d[1].l2 == doctest::Approx(std::sqrt((9.0 + 16.0) / 2.0)));
}

TEST_CASE("more runs bring the ensemble mean closer to the mean-field trajectory") {
  Sandbox box("converge");
  const auto cfg = box.file("c.yaml", kTenPatch);
  REQUIRE(run(cmd_calibrate, options(cfg, box.dir)).code == exit_ok);
  const auto rates = box.dir / "calibration.json";
  std::vector<std::vector<ColumnDeviation>> devs;
  Options mf = options(cfg, box.dir / "mf");
  mf.rates = rates;
  REQUIRE(run(cmd_meanfield, mf).code == exit_ok);
  const auto mean_field = io::read_trajectory_csv(box.dir / "mf" / "meanfield.csv").data;
  for (std::size_t runs : {1u, 100u}) {
    Options o = options(cfg, box.dir / ("s" + std::to_string(runs)));
    o.rates = rates;
    o.runs = runs;
    REQUIRE(run(cmd_simulate, o).code == exit_ok);
    const auto mean = io::read_trajectory_csv(box.dir / ("s" + std::to_string(runs)) / "mean.csv").data;
    devs.push_back(compare_trajectories(mean, mean_field));
  }
  std::size_t closer = 0;
  for (std::size_t c = 0; c < devs[0].size(); ++c) closer += devs[1][c].l2 < devs[0][c].l2 ? 1 : 0;
  CAPTURE(closer);
  CHECK(static_cast<double>(closer) >= 0.9 * static_cast<double>(devs[0].size()));
}

TEST_CASE("single-range sweep equals calibrate + simulate") {
  Sandbox box("sweep1");
  const auto cfg = box.file("c.yaml", std::string(kTenPatch) + "  r_mode: horizon\n");
  REQUIRE(run(cmd_calibrate, options(cfg, box.dir / "cal")).code == exit_ok);
  Options o = options(cfg, box.dir / "sim");
  o.rates = box.dir / "cal" / "calibration.json";
  REQUIRE(run(cmd_simulate, o).code == exit_ok);
  REQUIRE(run(cmd_sweep, options(cfg, box.dir / "sweep")).code == exit_ok);
  const auto report = read_json(box.dir / "sim" / "report.json");
  const auto sweep = read_json(box.dir / "sweep" / "sweep.json");
  REQUIRE(sweep["rows"].size() == 1);
  CHECK(sweep["rows"][0]["per_run_R"] == report["per_run_R"]);
  CHECK(sweep["rows"][0]["mean_R"] == report["mean_R"]);
  CHECK(sweep["rows"][0]["std_R"] == report["std_R"]);
  const auto csv = io::read_file(box.dir / "sweep" / "sweep.csv");
  CHECK(csv.find("\nrange_m,mean_R,std_R,runs\n2000,") != std::string::npos);
}

TEST_CASE("default sweep emits ten rows") {
  Sandbox box("sweep10");
  const auto cfg = box.file("c.yaml", "simulation:\n  runs: 2\n  calibration_days: 20\n");
  const auto r = run(cmd_sweep, options(cfg, box.dir));
  REQUIRE(r.code == exit_ok);
  const auto sweep = read_json(box.dir / "sweep.json");
  CHECK(sweep["rows"].size() == 10);
  CHECK(sweep["complete"] == true);
  CHECK(sweep["rows"][9]["range_m"] == 10000.0);
}

TEST_CASE("dry run prints the plan and writes nothing") {
  Sandbox box("dry");
  Options o = options(kSource / "configs" / "default.yaml", box.dir / "out");
  o.dry_run = true;
  auto r = run(cmd_sweep, o);
  CHECK(r.code == exit_ok);
  CHECK(r.out.find("plan: sweep 10 radio ranges") != std::string::npos);
  CHECK(r.out.find("200 simulations") != std::string::npos);
  r = run(cmd_calibrate, o);
  CHECK(r.out.find("plan: calibrate 10 patches") != std::string::npos);
  o.rates = kSource / "configs" / "single_patch_rates.json";
  CHECK(run(cmd_simulate, o).out.find("plan: simulate 20 runs") != std::string::npos);
  CHECK(run(cmd_meanfield, o).out.find("plan: integrate 1 patches") != std::string::npos);
  CHECK_FALSE(fs::exists(box.dir / "out"));
}

TEST_CASE("flag overrides") {
  Sandbox box("flags");
  Options o = options(kSource / "configs" / "single_patch.yaml", box.dir);
  o.rates = kSource / "configs" / "single_patch_rates.json";
  o.seed = 99;
  o.runs = 2;
  REQUIRE(run(cmd_simulate, o).code == exit_ok);
  const auto report = read_json(box.dir / "report.json");
  CHECK(report["seed"] == 99);
  CHECK(report["runs"] == 2);
  o.runs = 0;
  CHECK(run(cmd_simulate, o).code == exit_config_error);
}
