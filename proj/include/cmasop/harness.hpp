#pragma once

// Seeded trial batteries over benchmark cells, success rate / SP1
// aggregation and CSV output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cmasop/benchmarks.hpp"
#include "cmasop/optimizer.hpp"

namespace cmasop {

enum class Algorithm { cma_es, cma_es_sop, cma_es_sop_fixed_margin };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct Cell {
  Function function = Function::sphere;
  std::size_t dim = 0;
  std::size_t set_dim = 0;
  std::size_t set_size = 0;
  Mode mode = Mode::discrete;

  /// e.g. "discrete_sphere_N10_Nk2_Lk10"
  std::string label() const;
};

struct ExperimentConfig {
  std::vector<Cell> cells;
  std::vector<Algorithm> algorithms;
  std::size_t trials = 25;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_directory;
  std::size_t jobs = 1;
  std::size_t budget_per_dim = 10000;  // max evaluations = N * budget_per_dim

  /// Throws ConfigError when trials == 0, lists are empty, or a cell fails
  /// build_instance preconditions.
  void validate() const;
};

/// JSON mirror of ExperimentConfig:
/// {"cells":[{"function":"sphere","mode":"discrete","N":10,"Nk":2,"Lk":10}],
///  "algorithms":["cma-es","cma-es-sop"], "trials":25, "base_seed":0,
///  "output_directory":"out", "jobs":1, "budget_per_dim":10000}
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct TrialRecord {
  std::uint64_t seed = 0;
  bool success = false;
  // Evaluations spent: up to the successful candidate on success, the whole
  // run otherwise.
  std::size_t evaluations = 0;
  TerminationReason reason = TerminationReason::still_running;
  double best_fitness = 0.0;
  // (evaluations, best fitness so far) after every iteration.
  std::vector<std::pair<std::size_t, double>> trajectory;
};

struct CellResult {
  Cell cell;
  Algorithm algorithm = Algorithm::cma_es_sop;
  double success_rate = 0.0;
  std::optional<double> sp1;                 // absent when no trial succeeded
  std::optional<double> mean_evals_success;  // ditto
  std::vector<TrialRecord> trials;
};

/// Seed of an independent stream derived from `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// The problem instance that trial `trial_seed` of `cell` runs on; shared by
/// all algorithms so that they are compared on identical point sets.
ProblemInstance instance_for_trial(const Cell& cell, std::uint64_t trial_seed);

/// Optimizer settings for one trial: m0 ~ U([1,5]^N), sigma0 = 2, C0 = I.
OptimizerConfig trial_optimizer_config(const ProblemInstance& instance, Algorithm algorithm,
                                       std::uint64_t trial_seed, std::size_t max_evaluations);

/// Runs ask-tell to termination. Numerical errors end up in `reason`.
TrialRecord run_trial(const ProblemInstance& instance, Algorithm algorithm,
                      std::uint64_t trial_seed, std::size_t max_evaluations);

/// Success rate, SP1 = (mean evaluations over successful trials) / SR.
CellResult aggregate(std::vector<TrialRecord> records);

/// Runs trial_seed = base_seed + i for i < trials, optionally on several threads.
CellResult run_cell(const Cell& cell, Algorithm algorithm, std::size_t trials,
                    std::uint64_t base_seed, std::size_t budget_per_dim, std::size_t jobs = 1);

struct PlotRow {
  std::size_t evaluations = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Best-so-far median and quartiles across trials at every multiple of
/// `stride` up to `max_evaluations`, each trajectory held at its last value.
std::vector<PlotRow> plot_rows(const std::vector<TrialRecord>& trials, std::size_t stride,
                               std::size_t max_evaluations);

/// Writes results.csv, trials.csv and plot/<cell>_<algorithm>.csv into the
/// output directory. Throws IoError before running anything if the directory
/// is not writable.
std::vector<CellResult> run_experiment(const ExperimentConfig& config);

inline constexpr std::string_view results_csv_header =
    "function,mode,N,Nk,Lk,algorithm,trials,success_rate,sp1,mean_evals_success";

std::string results_csv_row(const CellResult& result);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Human-readable SR / SP1 table built from a results.csv file.
std::string format_results_table(const std::filesystem::path& results_csv);

}  // namespace cmasop
