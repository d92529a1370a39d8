// Command-line front end for the benchmark harness.
//
//   cmasop run --config <path> --out <dir> [--seed S] [--trials T] [--jobs J]
//   cmasop table --out <dir>
//   cmasop instance --function sphere --mode discrete --N 10 --Nk 2 --Lk 10 --seed 0

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cmasop/benchmarks.hpp"
#include "cmasop/error.hpp"
#include "cmasop/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"CMA-ES on sets of points: benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> jobs;
  auto* run = app.add_subcommand("run", "Run the trials described by a config file");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Base seed (overrides the config)");
  run->add_option("--trials", trials, "Trials per cell (overrides the config)")->check(CLI::PositiveNumber);
  run->add_option("--jobs", jobs, "Concurrent trials")->check(CLI::PositiveNumber);

  std::string table_dir;
  auto* table = app.add_subcommand("table", "Print the SR/SP1 table of a finished run");
  table->add_option("--out", table_dir, "Output directory of a run")->required();

  std::string function = "sphere";
  std::string mode = "discrete";
  std::size_t dim = 10, set_dim = 2, set_size = 10;
  std::uint64_t instance_seed = 0;
  auto* instance = app.add_subcommand("instance", "Print a generated problem instance as JSON");
  instance->add_option("--function", function, "sphere | ellipsoid | reversed-ellipsoid | rosenbrock");
  instance->add_option("--mode", mode, "discrete | mixed");
  instance->add_option("--N", dim, "Total dimension");
  instance->add_option("--Nk", set_dim, "Dimension of each point set");
  instance->add_option("--Lk", set_size, "Points per set");
  instance->add_option("--seed", instance_seed, "Generation seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cmasop::ExperimentConfig config = cmasop::load_experiment_config(config_path);
      config.output_directory = out_dir;
      if (seed) config.base_seed = *seed;
      if (trials) config.trials = *trials;
      if (jobs) config.jobs = *jobs;
      const auto results = cmasop::run_experiment(config);
      std::cout << cmasop::format_results_table(config.output_directory / "results.csv");
    } else if (*table) {
      std::cout << cmasop::format_results_table(std::filesystem::path(table_dir) / "results.csv");
    } else if (*instance) {
      const auto inst = cmasop::build_instance(cmasop::parse_function(function), dim, set_dim,
                                               set_size, cmasop::parse_mode(mode), instance_seed);
      std::cout << cmasop::instance_to_json(inst).dump(2) << '\n';
    }
  } catch (const cmasop::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
