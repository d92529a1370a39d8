#pragma once

// Ask-and-tell CMA-ES on sets of points: samples are encoded to the nearest
// point of every point-set block before evaluation, the CMA update runs on the
// raw samples, and the covariance is margin-corrected afterwards.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cmasop/cma_core.hpp"
#include "cmasop/margin.hpp"
#include "cmasop/search_space.hpp"

namespace cmasop {

enum class TerminationReason {
  still_running,
  success,
  evaluation_budget,
  eigenvalue_collapse,
  numerical_error,
};

std::string_view to_string(TerminationReason reason);

/// Decides on the stop reason; precedence is success, evaluation budget,
/// eigenvalue collapse (min eigenvalue of step_size^2 C below threshold),
/// numerical error. A NaN min_eigenvalue never counts as a collapse.
TerminationReason check_termination(bool success, std::size_t evaluations,
                                    std::size_t max_evaluations, double step_size,
                                    double min_eigenvalue, double threshold, bool numerical_error);

/// Called once per evaluated candidate with the encoded solution and its fitness.
using SuccessPredicate = std::function<bool(const Vector& encoded, double fitness)>;

struct OptimizerConfig {
  SearchSpace space;
  Vector initial_mean;
  double initial_step_size = 1.0;
  Matrix initial_covariance;
  StrategyParams strategy;
  MarginState margin;
  std::size_t max_evaluations = 0;
  double min_eigenvalue_threshold = 1e-30;
  std::uint64_t seed = 0;
  bool margin_enabled = true;
  // Off: every alpha_k stays at its initial value.
  bool adaptation_enabled = true;
  SuccessPredicate success;

  /// Default strategy and margin parameters, C = I, budget N * 10^4.
  static OptimizerConfig defaults(SearchSpace space, Vector initial_mean, double initial_step_size,
                                  std::uint64_t seed);
};

struct BestSoFar {
  Vector solution;  // encoded
  double fitness = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;  // evaluation count at which it was found
};

struct Snapshot {
  std::size_t iteration = 0;
  std::size_t evaluations = 0;
  double step_size = 0.0;
  double min_eigenvalue = 0.0;  // of C
  double max_eigenvalue = 0.0;
  std::vector<double> alpha;
  double best_fitness = std::numeric_limits<double>::infinity();
};

class SopOptimizer {
 public:
  /// Throws ConfigError on inconsistent dimensions or budget < lambda, and
  /// DecompositionFailure if the initial covariance is not positive definite.
  explicit SopOptimizer(OptimizerConfig config);

  /// Samples lambda raw vectors and returns their encodings. Throws
  /// InvalidState after termination or when the previous batch is untold.
  const std::vector<Vector>& ask();

  /// One fitness per candidate of the last ask, evaluated on the encodings.
  /// Throws InvalidFitness on a length mismatch or NaN.
  void tell(std::span<const double> fitness);

  TerminationReason termination() const;
  bool terminated() const { return termination() != TerminationReason::still_running; }

  const DistributionState& state() const { return state_; }
  const StrategyParams& params() const { return config_.strategy; }
  const MarginState& margin() const { return margin_; }
  const SearchSpace& space() const { return config_.space; }
  const BestSoFar& best() const { return best_; }
  std::size_t evaluations() const { return evaluations_; }
  /// Evaluation count of the first candidate satisfying the success predicate.
  std::optional<std::size_t> success_evaluations() const { return success_evaluations_; }
  /// Raw samples of the current (or last told) batch.
  const std::vector<Sample>& samples() const { return samples_; }
  /// Results of the last tell's correction passes, one per point-set subspace.
  const std::vector<MarginCorrectionResult>& last_corrections() const { return corrections_; }
  Snapshot snapshot() const;

 private:
  void refresh_factor();
  void record_spectrum();

  OptimizerConfig config_;
  DistributionState state_;
  MarginState margin_;
  Rng rng_;
  std::optional<CovarianceFactor> factor_;
  std::vector<Sample> samples_;
  std::vector<Vector> candidates_;
  std::vector<MarginCorrectionResult> corrections_;
  BestSoFar best_;
  std::size_t evaluations_ = 0;
  std::optional<std::size_t> success_evaluations_;
  bool awaiting_tell_ = false;
  bool numerical_error_ = false;
  double min_eigenvalue_ = 0.0;
  double max_eigenvalue_ = 0.0;
};

}  // namespace cmasop
