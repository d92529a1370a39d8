#include "cmasop/optimizer.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "cmasop/error.hpp"

namespace cmasop {

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::still_running: return "still-running";
    case TerminationReason::success: return "success";
    case TerminationReason::evaluation_budget: return "evaluation-budget";
    case TerminationReason::eigenvalue_collapse: return "eigenvalue-collapse";
    case TerminationReason::numerical_error: return "numerical-error";
  }
  return "unknown";
}

TerminationReason check_termination(bool success, std::size_t evaluations,
                                    std::size_t max_evaluations, double step_size,
                                    double min_eigenvalue, double threshold,
                                    bool numerical_error) {
  if (success) return TerminationReason::success;
  if (evaluations >= max_evaluations) return TerminationReason::evaluation_budget;
  if (step_size * step_size * min_eigenvalue < threshold) {
    return TerminationReason::eigenvalue_collapse;
  }
  if (numerical_error) return TerminationReason::numerical_error;
  return TerminationReason::still_running;
}

OptimizerConfig OptimizerConfig::defaults(SearchSpace space, Vector initial_mean,
                                          double initial_step_size, std::uint64_t seed) {
  const std::size_t n = space.total_dim();
  const auto dim = static_cast<Eigen::Index>(n);
  StrategyParams strategy = default_strategy_params(n);
  MarginState margin = MarginState::initial(space, strategy.lambda);
  return OptimizerConfig{.space = std::move(space),
                         .initial_mean = std::move(initial_mean),
                         .initial_step_size = initial_step_size,
                         .initial_covariance = Matrix::Identity(dim, dim),
                         .strategy = std::move(strategy),
                         .margin = std::move(margin),
                         .max_evaluations = n * 10000,
                         .min_eigenvalue_threshold = 1e-30,
                         .seed = seed,
                         .margin_enabled = true,
                         .adaptation_enabled = true,
                         .success = {}};
}

SopOptimizer::SopOptimizer(OptimizerConfig config)
    : config_(std::move(config)), margin_(config_.margin), rng_(config_.seed) {
  const std::size_t n = config_.space.total_dim();
  if (static_cast<std::size_t>(config_.initial_mean.size()) != n) {
    throw ConfigError("initial mean length does not match the search space");
  }
  if (config_.strategy.dim != n) throw ConfigError("strategy parameters dim mismatch");
  if (config_.max_evaluations < config_.strategy.lambda) {
    throw ConfigError("max_evaluations must be at least lambda");
  }
  if (!(config_.min_eigenvalue_threshold > 0.0)) {
    throw ConfigError("eigenvalue threshold must be positive");
  }
  std::size_t sets = 0;
  for (std::size_t k = 0; k < config_.space.num_subspaces(); ++k) {
    sets += config_.space.is_point_set(k) ? 1 : 0;
  }
  if (margin_.alpha.size() != sets) throw ConfigError("one margin value per point set required");
  try {
    state_ = DistributionState::initial(config_.initial_mean, config_.initial_step_size,
                                        config_.initial_covariance);
  } catch (const InvalidDimension& e) {
    throw ConfigError(e.what());
  }
  factor_.emplace(state_.covariance);
  record_spectrum();
}

void SopOptimizer::record_spectrum() {
  if (factor_) {
    min_eigenvalue_ = factor_->min_eigenvalue();
    max_eigenvalue_ = factor_->max_eigenvalue();
    return;
  }
  min_eigenvalue_ = max_eigenvalue_ = std::nan("");
  if (!state_.covariance.allFinite()) return;
  // C lost definiteness through rounding; its spectrum still decides
  // whether this counts as an eigenvalue collapse.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(state_.covariance, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) return;
  min_eigenvalue_ = solver.eigenvalues().minCoeff();
  max_eigenvalue_ = solver.eigenvalues().maxCoeff();
}

void SopOptimizer::refresh_factor() {
  try {
    if (!state_.mean.allFinite() || !std::isfinite(state_.step_size)) {
      throw DecompositionFailure("non-finite distribution state");
    }
    factor_.emplace(state_.covariance);
  } catch (const DecompositionFailure&) {
    factor_.reset();
    numerical_error_ = true;
  }
  record_spectrum();
}

const std::vector<Vector>& SopOptimizer::ask() {
  if (awaiting_tell_) throw InvalidState("ask called twice without tell");
  if (terminated()) throw InvalidState("ask called after termination");
  samples_ = sample_population(state_, config_.strategy, *factor_, rng_);
  candidates_.clear();
  for (auto& s : samples_) {
    s.encoded_x = config_.space.encode(s.x);
    candidates_.push_back(s.encoded_x);
  }
  awaiting_tell_ = true;
  return candidates_;
}

void SopOptimizer::tell(std::span<const double> fitness) {
  if (!awaiting_tell_) throw InvalidState("tell called without a pending batch");
  if (fitness.size() != samples_.size()) {
    throw InvalidFitness("expected " + std::to_string(samples_.size()) + " fitness values, got " +
                         std::to_string(fitness.size()));
  }
  const auto ranking = rank_samples(fitness);  // throws on NaN
  awaiting_tell_ = false;

  for (std::size_t i = 0; i < samples_.size(); ++i) {
    samples_[i].fitness = fitness[i];
    ++evaluations_;
    if (fitness[i] < best_.fitness) {
      best_.fitness = fitness[i];
      best_.solution = samples_[i].encoded_x;
      best_.evaluations = evaluations_;
    }
    if (!success_evaluations_ && config_.success && config_.success(samples_[i].encoded_x, fitness[i])) {
      success_evaluations_ = evaluations_;
    }
  }

  corrections_.clear();
  try {
    apply_cma_update(state_, config_.strategy, samples_, ranking);

    if (config_.margin_enabled && !margin_.alpha.empty()) {
      CovarianceCholesky cholesky(state_.covariance);
      std::size_t set_index = 0;
      for (std::size_t k = 0; k < config_.space.num_subspaces(); ++k) {
        if (!config_.space.is_point_set(k)) continue;
        double& alpha = margin_.alpha[set_index++];
        corrections_.push_back(apply_margin_correction(state_, config_.space, alpha, k, rng_, cholesky));
        if (config_.adaptation_enabled) {
          alpha = adapt_margin(alpha, corrections_.back().probabilities, margin_.alpha_target,
                               margin_.beta, margin_.alpha_min, margin_.alpha_max);
        }
      }
    }
  } catch (const DecompositionFailure&) {
    numerical_error_ = true;
    factor_.reset();
    record_spectrum();
    return;
  }
  refresh_factor();
}

TerminationReason SopOptimizer::termination() const {
  return check_termination(success_evaluations_.has_value(), evaluations_, config_.max_evaluations,
                           state_.step_size, min_eigenvalue_, config_.min_eigenvalue_threshold,
                           numerical_error_);
}

Snapshot SopOptimizer::snapshot() const {
  Snapshot s;
  s.iteration = state_.iteration;
  s.evaluations = evaluations_;
  s.step_size = state_.step_size;
  s.min_eigenvalue = min_eigenvalue_;
  s.max_eigenvalue = max_eigenvalue_;
  s.alpha = margin_.alpha;
  s.best_fitness = best_.fitness;
  return s;
}

}  // namespace cmasop
