#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "patchsim/commands.hpp"

namespace cli = patchsim::cli;

namespace {

void add_common(CLI::App* sub, cli::Options& opt, bool with_rates) {
  sub->add_option("--config", opt.config, "experiment config (YAML or JSON)")->check(CLI::ExistingFile);
  if (with_rates) sub->add_option("--rates", opt.rates, "calibration or rates JSON");
  sub->add_option("--out", opt.out, "output directory (overrides output.directory)");
  sub->add_option("--seed", opt.seed, "master seed (overrides simulation.seed)");
  sub->add_option("--runs", opt.runs, "number of runs (overrides simulation.runs)");
  sub->add_option("--jobs", opt.jobs, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  sub->add_flag("--dry-run", opt.dry_run, "print the resolved plan and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-level data-collection model for mobile sensor herds"};
  app.require_subcommand(1);

  cli::Options opt;
  auto* calibrate = app.add_subcommand("calibrate", "estimate patch rates from the movement model");
  add_common(calibrate, opt, false);
  auto* simulate = app.add_subcommand("simulate", "stochastic runs, ensemble mean and delivery report");
  add_common(simulate, opt, true);
  auto* meanfield = app.add_subcommand("meanfield", "integrate the mean-field equations");
  add_common(meanfield, opt, true);
  auto* sweep = app.add_subcommand("sweep", "delivery rate against radio range");
  add_common(sweep, opt, false);

  cli::CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "deviation between two trajectory CSVs");
  compare->add_option("stochastic", cmp.stochastic, "ensemble mean CSV")->required();
  compare->add_option("meanfield", cmp.meanfield, "mean-field CSV")->required();
  compare->add_option("--threshold", cmp.threshold, "fail (exit 4) if any max-abs deviation exceeds this");
  const std::map<std::string, cli::ColumnGroup> groups{{"all", cli::ColumnGroup::all},
                                                      {"population", cli::ColumnGroup::population},
                                                      {"base_age", cli::ColumnGroup::base_age},
                                                      {"patch_age", cli::ColumnGroup::patch_age}};
  std::string group_name = "all";
  compare->add_option("--columns", group_name, "column group to compare")
      ->check(CLI::IsMember({"all", "population", "base_age", "patch_age"}))
      ->option_text("all|population|base_age|patch_age");
  compare->add_option("--out", cmp.out, "directory for compare.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::exit_config_error;
  }

  if (*calibrate) return cli::cmd_calibrate(opt, std::cout, std::cerr);
  if (*simulate) return cli::cmd_simulate(opt, std::cout, std::cerr);
  if (*meanfield) return cli::cmd_meanfield(opt, std::cout, std::cerr);
  if (*sweep) return cli::cmd_sweep(opt, std::cout, std::cerr);
  cmp.group = groups.at(group_name);
  return cli::cmd_compare(cmp, std::cout, std::cerr);
}
