// pfsi: run, check, oracle and sweep front end.

#include <CLI11.hpp>
#include <iostream>

#include "pfsi/cli.hpp"

int main(int argc, char** argv) {
  using namespace pfsi::cli;
  CLI::App app{"pfsi: penalised fluid-structure interaction solver"};
  app.require_subcommand(1);

  RunOptions ro;
  ro.log_level = log_level_from_env();
  std::string config;
  unsigned long seed = 0;

  auto* run = app.add_subcommand("run", "run the continuation schedule of a config");
  run->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", ro.out_dir, "output directory (overrides [output] dir)");
  run->add_option("--stage-tag", ro.stage_tag, "stop after the named stage");
  auto* run_seed = run->add_option("--seed", seed, "seed of the initial guess");

  std::string archive;
  auto* check = app.add_subcommand("check", "recompute diagnostics from an archive");
  check->add_option("archive", archive, "archive path")->required();

  std::string oracle = "all";
  int n = 0, m = -1, grid = 0;
  auto* orc = app.add_subcommand("oracle", "compare modules against brute-force oracles");
  orc->add_option("name", oracle, "oracle name or 'all'");
  orc->add_option("-n", n, "basis size");
  orc->add_option("-m", m, "time harmonics");
  orc->add_option("--grid", grid, "finite-difference grid size");

  std::vector<std::string> configs;
  std::string sweep_out = "pfsi_sweep";
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "run several configs in parallel processes");
  sweep->add_option("--config", configs, "config files")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "root output directory");
  sweep->add_option("-j,--jobs", jobs, "parallel processes");
  auto* sweep_seed = sweep->add_option("--seed", seed, "seed of the initial guess");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      if (run_seed->count()) ro.seed = seed;
      return cmd_run_file(config, ro, std::cout);
    }
    if (*check) return cmd_check(archive, std::cout);
    if (*orc) return cmd_oracle(oracle, n, m, grid, std::cout);
    if (*sweep) {
      if (sweep_seed->count()) ro.seed = seed;
      return cmd_sweep(configs, sweep_out, jobs, ro, std::cout);
    }
  } catch (const pfsi::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverError;
  }
  return kOk;
}
