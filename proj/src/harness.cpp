#include "cmasop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "cmasop/error.hpp"

namespace cmasop {

namespace fs = std::filesystem;

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::cma_es: return "cma-es";
    case Algorithm::cma_es_sop: return "cma-es-sop";
    case Algorithm::cma_es_sop_fixed_margin: return "cma-es-sop-fixed-margin";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::cma_es, Algorithm::cma_es_sop, Algorithm::cma_es_sop_fixed_margin}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string Cell::label() const {
  std::ostringstream os;
  os << to_string(mode) << '_' << to_string(function) << "_N" << dim << "_Nk" << set_dim << "_Lk"
     << set_size;
  return os.str();
}

void ExperimentConfig::validate() const {
  if (trials == 0) throw ConfigError("trials must be >= 1");
  if (cells.empty()) throw ConfigError("at least one cell is required");
  if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
  if (budget_per_dim == 0) throw ConfigError("budget_per_dim must be >= 1");
  for (const auto& c : cells) {
    // Throws with the precise reason if the cell is not buildable.
    build_instance(c.function, c.dim, c.set_dim, c.set_size, c.mode, 0);
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig config;
    for (const auto& c : j.at("cells")) {
      Cell cell;
      cell.function = parse_function(c.at("function").get<std::string>());
      cell.mode = parse_mode(c.value("mode", std::string("discrete")));
      cell.dim = c.at("N").get<std::size_t>();
      cell.set_dim = c.at("Nk").get<std::size_t>();
      cell.set_size = c.at("Lk").get<std::size_t>();
      config.cells.push_back(cell);
    }
    for (const auto& a : j.at("algorithms")) {
      config.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    config.trials = j.value("trials", std::size_t{25});
    config.base_seed = j.value("base_seed", std::uint64_t{0});
    config.output_directory = j.value("output_directory", std::string{});
    config.jobs = j.value("jobs", std::size_t{1});
    config.budget_per_dim = j.value("budget_per_dim", std::size_t{10000});
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& config) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : config.cells) {
    cells.push_back({{"function", to_string(c.function)},
                     {"mode", to_string(c.mode)},
                     {"N", c.dim},
                     {"Nk", c.set_dim},
                     {"Lk", c.set_size}});
  }
  nlohmann::json algorithms = nlohmann::json::array();
  for (auto a : config.algorithms) algorithms.push_back(to_string(a));
  return {{"cells", cells},
          {"algorithms", algorithms},
          {"trials", config.trials},
          {"base_seed", config.base_seed},
          {"output_directory", config.output_directory.string()},
          {"jobs", config.jobs},
          {"budget_per_dim", config.budget_per_dim}};
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

namespace {

enum Stream : std::uint64_t { instance_stream = 1, initial_mean_stream = 2, optimizer_stream = 3 };

}  // namespace

ProblemInstance instance_for_trial(const Cell& cell, std::uint64_t trial_seed) {
  return build_instance(cell.function, cell.dim, cell.set_dim, cell.set_size, cell.mode,
                        derive_seed(trial_seed, instance_stream));
}

OptimizerConfig trial_optimizer_config(const ProblemInstance& instance, Algorithm algorithm,
                                       std::uint64_t trial_seed, std::size_t max_evaluations) {
  Rng init_rng(derive_seed(trial_seed, initial_mean_stream));
  std::uniform_real_distribution<double> uniform(1.0, 5.0);
  Vector mean(static_cast<Eigen::Index>(instance.dim));
  for (Eigen::Index i = 0; i < mean.size(); ++i) mean(i) = uniform(init_rng);

  OptimizerConfig config = OptimizerConfig::defaults(instance.space, std::move(mean), 2.0,
                                                     derive_seed(trial_seed, optimizer_stream));
  config.max_evaluations = std::max(max_evaluations, config.strategy.lambda);
  config.margin_enabled = algorithm != Algorithm::cma_es;
  config.adaptation_enabled = algorithm == Algorithm::cma_es_sop;
  config.success = [&instance](const Vector& encoded, double fitness) {
    return instance.is_success(encoded, fitness);
  };
  return config;
}

TrialRecord run_trial(const ProblemInstance& instance, Algorithm algorithm,
                      std::uint64_t trial_seed, std::size_t max_evaluations) {
  SopOptimizer opt(trial_optimizer_config(instance, algorithm, trial_seed, max_evaluations));
  TrialRecord record;
  record.seed = trial_seed;

  std::vector<double> fitness;
  while (!opt.terminated()) {
    const auto& candidates = opt.ask();
    fitness.clear();
    for (const auto& c : candidates) fitness.push_back(instance.evaluate(c));
    opt.tell(fitness);
    record.trajectory.emplace_back(opt.evaluations(), opt.best().fitness);
  }
  record.reason = opt.termination();
  record.success = record.reason == TerminationReason::success;
  record.evaluations = opt.success_evaluations().value_or(opt.evaluations());
  record.best_fitness = opt.best().fitness;
  return record;
}

CellResult aggregate(std::vector<TrialRecord> records) {
  if (records.empty()) throw ConfigError("aggregate needs at least one trial");
  CellResult result;
  std::size_t successes = 0;
  double evals = 0.0;
  for (const auto& r : records) {
    if (!r.success) continue;
    ++successes;
    evals += static_cast<double>(r.evaluations);
  }
  result.success_rate = static_cast<double>(successes) / static_cast<double>(records.size());
  if (successes > 0) {
    result.mean_evals_success = evals / static_cast<double>(successes);
    result.sp1 = *result.mean_evals_success / result.success_rate;
  }
  result.trials = std::move(records);
  return result;
}

CellResult run_cell(const Cell& cell, Algorithm algorithm, std::size_t trials,
                    std::uint64_t base_seed, std::size_t budget_per_dim, std::size_t jobs) {
  std::vector<TrialRecord> records(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < trials; i = next++) {
      const std::uint64_t seed = base_seed + i;
      const ProblemInstance instance = instance_for_trial(cell, seed);
      records[i] = run_trial(instance, algorithm, seed, cell.dim * budget_per_dim);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  CellResult result = aggregate(std::move(records));
  result.cell = cell;
  result.algorithm = algorithm;
  return result;
}

namespace {

// Linear interpolation between order statistics of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<PlotRow> plot_rows(const std::vector<TrialRecord>& trials, std::size_t stride,
                               std::size_t max_evaluations) {
  std::vector<PlotRow> rows;
  if (trials.empty() || stride == 0) return rows;
  std::vector<std::size_t> cursor(trials.size(), 0);
  std::vector<double> values(trials.size());
  for (std::size_t e = stride; e <= max_evaluations; e += stride) {
    std::size_t have = 0;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const auto& traj = trials[t].trajectory;
      while (cursor[t] < traj.size() && traj[cursor[t]].first <= e) ++cursor[t];
      if (cursor[t] == 0) continue;
      values[have++] = traj[cursor[t] - 1].second;
    }
    if (have == 0) continue;
    std::vector<double> sorted(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(have));
    std::sort(sorted.begin(), sorted.end());
    rows.push_back({e, quantile(sorted, 0.5), quantile(sorted, 0.25), quantile(sorted, 0.75)});
  }
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string results_csv_row(const CellResult& r) {
  std::ostringstream os;
  os << to_string(r.cell.function) << ',' << to_string(r.cell.mode) << ',' << r.cell.dim << ','
     << r.cell.set_dim << ',' << r.cell.set_size << ',' << to_string(r.algorithm) << ','
     << r.trials.size() << ',' << format_double(r.success_rate) << ','
     << (r.sp1 ? format_double(*r.sp1) : "") << ','
     << (r.mean_evals_success ? format_double(*r.mean_evals_success) : "");
  return os.str();
}

namespace {

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<CellResult> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const fs::path& dir = config.output_directory;
  if (dir.empty()) throw IoError("no output directory given");
  std::error_code ec;
  fs::create_directories(dir / "plot", ec);
  if (ec) throw IoError("cannot create " + (dir / "plot").string() + ": " + ec.message());

  // Open everything up front so an unwritable location fails before any trial.
  std::ofstream results = open_for_write(dir / "results.csv");
  std::ofstream trials_csv = open_for_write(dir / "trials.csv");
  {
    std::ofstream cfg = open_for_write(dir / "config.json");
    cfg << experiment_config_to_json(config).dump(2) << '\n';
  }
  results << results_csv_header << '\n';
  trials_csv << "function,mode,N,Nk,Lk,algorithm,trial,seed,success,evaluations,termination,"
                "best_fitness\n";

  std::vector<CellResult> out;
  for (const auto& cell : config.cells) {
    for (Algorithm algorithm : config.algorithms) {
      CellResult r = run_cell(cell, algorithm, config.trials, config.base_seed,
                              config.budget_per_dim, config.jobs);
      results << results_csv_row(r) << '\n';
      for (std::size_t i = 0; i < r.trials.size(); ++i) {
        const auto& t = r.trials[i];
        trials_csv << to_string(cell.function) << ',' << to_string(cell.mode) << ',' << cell.dim
                   << ',' << cell.set_dim << ',' << cell.set_size << ',' << to_string(algorithm)
                   << ',' << i << ',' << t.seed << ',' << (t.success ? 1 : 0) << ','
                   << t.evaluations << ',' << to_string(t.reason) << ','
                   << format_double(t.best_fitness) << '\n';
      }

      const std::size_t lambda = default_strategy_params(cell.dim).lambda;
      std::ofstream plot = open_for_write(dir / "plot" /
                                          (cell.label() + "_" + std::string(to_string(algorithm)) +
                                           ".csv"));
      plot << "evaluations,median,q1,q3\n";
      for (const auto& row : plot_rows(r.trials, lambda, cell.dim * config.budget_per_dim)) {
        plot << row.evaluations << ',' << format_double(row.median) << ','
             << format_double(row.q1) << ',' << format_double(row.q3) << '\n';
      }
      out.push_back(std::move(r));
    }
  }
  if (!results || !trials_csv) throw IoError("write to " + dir.string() + " failed");
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string format_results_table(const fs::path& results_csv) {
  std::ifstream in(results_csv);
  if (!in) throw IoError("cannot open " + results_csv.string());
  std::string line;
  if (!std::getline(in, line) || line != results_csv_header) {
    throw ConfigError(results_csv.string() + " does not start with the results header");
  }
  std::ostringstream os;
  os << std::left << std::setw(20) << "function" << std::setw(10) << "mode" << std::setw(5) << "N"
     << std::setw(4) << "Nk" << std::setw(4) << "Lk" << std::setw(26) << "algorithm"
     << std::setw(8) << "SR" << "SP1\n";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw ConfigError("malformed results row: " + line);
    std::ostringstream sr;
    sr << std::fixed << std::setprecision(2) << std::stod(f[7]);
    std::ostringstream sp1;
    if (f[8].empty()) {
      sp1 << "--";
    } else {
      sp1 << std::fixed << std::setprecision(1) << std::stod(f[8]);
    }
    os << std::left << std::setw(20) << f[0] << std::setw(10) << f[1] << std::setw(5) << f[2]
       << std::setw(4) << f[3] << std::setw(4) << f[4] << std::setw(26) << f[5] << std::setw(8)
       << sr.str() << sp1.str() << '\n';
  }
  return os.str();
}

}  // namespace cmasop
