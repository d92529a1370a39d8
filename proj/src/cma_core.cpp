#include "cmasop/cma_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cmasop/error.hpp"

namespace cmasop {

DistributionState DistributionState::initial(const Vector& mean, double step_size,
                                             const Matrix& covariance) {
  const auto n = mean.size();
  if (n == 0) throw InvalidDimension("distribution state needs dim >= 1");
  if (covariance.rows() != n || covariance.cols() != n) {
    throw InvalidDimension("covariance shape does not match the mean");
  }
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw InvalidDimension("step size must be finite and positive");
  }
  DistributionState s;
  s.mean = mean;
  s.step_size = step_size;
  s.covariance = covariance;
  s.path_sigma = Vector::Zero(n);
  s.path_c = Vector::Zero(n);
  s.iteration = 0;
  return s;
}

CovarianceFactor::CovarianceFactor(const Matrix& covariance) {
  if (!covariance.allFinite()) throw DecompositionFailure("covariance has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
  if (solver.info() != Eigen::Success) throw DecompositionFailure("eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  if (!eigenvalues_.allFinite() || eigenvalues_.minCoeff() <= 0.0) {
    throw DecompositionFailure("covariance is not positive definite");
  }
  sqrt_ = eigenvectors_ * eigenvalues_.cwiseSqrt().asDiagonal() * eigenvectors_.transpose();
}

double chi_n(std::size_t dim) {
  const double n = static_cast<double>(dim);
  return std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
}

StrategyParams default_strategy_params(std::size_t dim) {
  if (dim == 0) throw InvalidDimension("strategy parameters need dim >= 1");
  const double n = static_cast<double>(dim);

  StrategyParams p;
  p.dim = dim;
  p.lambda = 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(n)));
  p.mu = p.lambda / 2;

  p.weights.resize(p.mu);
  const double base = std::log((static_cast<double>(p.lambda) + 1.0) / 2.0);
  for (std::size_t i = 0; i < p.mu; ++i) {
    p.weights[i] = base - std::log(static_cast<double>(i + 1));
  }
  const double sum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (double& w : p.weights) w /= sum;
  double sq = 0.0;
  for (double w : p.weights) sq += w * w;
  p.mu_eff = 1.0 / sq;

  const double mu_eff = p.mu_eff;
  p.c_m = 1.0;
  p.c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
  p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + p.c_sigma;
  p.c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
  p.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
  p.c_mu = std::min(1.0 - p.c_1,
                    2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) * (n + 2.0) + mu_eff));
  p.chi_n = chi_n(dim);
  return p;
}

std::vector<Sample> sample_population(const DistributionState& state, const StrategyParams& params,
                                      const CovarianceFactor& factor, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(state.dim());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Sample> samples(params.lambda);
  for (auto& s : samples) {
    s.z.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) s.z(j) = normal(rng);
    s.y = factor.sqrt() * s.z;
    s.x = state.step_size * s.y + state.mean;
    s.encoded_x = s.x;
  }
  return samples;
}

std::vector<Sample> sample_population(const DistributionState& state, const StrategyParams& params,
                                      Rng& rng) {
  return sample_population(state, params, CovarianceFactor(state.covariance), rng);
}

std::vector<std::size_t> rank_samples(std::span<const double> fitness) {
  for (double f : fitness) {
    if (std::isnan(f)) throw InvalidFitness("fitness value is NaN");
  }
  std::vector<std::size_t> order(fitness.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
  return order;
}

std::vector<std::size_t> rank_samples(const std::vector<Sample>& samples) {
  std::vector<double> fitness;
  fitness.reserve(samples.size());
  for (const auto& s : samples) fitness.push_back(s.fitness);
  return rank_samples(fitness);
}

bool heaviside(const Vector& path_sigma_new, double c_sigma, std::size_t iteration,
               std::size_t dim, double chi_n) {
  const double t1 = 2.0 * (static_cast<double>(iteration) + 1.0);
  const double lhs = path_sigma_new.norm() / std::sqrt(1.0 - std::pow(1.0 - c_sigma, t1));
  const double rhs = (1.4 + 2.0 / (static_cast<double>(dim) + 1.0)) * chi_n;
  return lhs < rhs;
}

namespace {

void check_ranking(const StrategyParams& params, const std::vector<Sample>& samples,
                   std::span<const std::size_t> ranking) {
  if (params.mu > ranking.size() || params.weights.size() != params.mu) {
    throw InvalidDimension("ranking shorter than mu");
  }
  for (std::size_t i = 0; i < params.mu; ++i) {
    if (ranking[i] >= samples.size()) throw InvalidDimension("ranking index out of range");
  }
}

Vector weighted_sum(const StrategyParams& params, const std::vector<Sample>& samples,
                    std::span<const std::size_t> ranking, Vector Sample::*member) {
  Vector acc = Vector::Zero((samples[ranking[0]].*member).size());
  for (std::size_t i = 0; i < params.mu; ++i) {
    acc += params.weights[i] * (samples[ranking[i]].*member);
  }
  return acc;
}

}  // namespace

PathUpdate update_evolution_paths(const DistributionState& state, const StrategyParams& params,
                                  const std::vector<Sample>& samples,
                                  std::span<const std::size_t> ranking) {
  check_ranking(params, samples, ranking);
  const double cs = params.c_sigma;
  const double cc = params.c_c;

  PathUpdate out;
  out.path_sigma = (1.0 - cs) * state.path_sigma +
                   std::sqrt(cs * (2.0 - cs) * params.mu_eff) *
                       weighted_sum(params, samples, ranking, &Sample::z);
  out.h_sigma = heaviside(out.path_sigma, cs, state.iteration, state.dim(), params.chi_n);
  const double h = out.h_sigma ? 1.0 : 0.0;
  out.path_c = (1.0 - cc) * state.path_c +
               h * std::sqrt(cc * (2.0 - cc) * params.mu_eff) *
                   weighted_sum(params, samples, ranking, &Sample::y);
  return out;
}

Vector update_mean(const DistributionState& state, const StrategyParams& params,
                   const std::vector<Sample>& samples, std::span<const std::size_t> ranking) {
  check_ranking(params, samples, ranking);
  Vector step = Vector::Zero(state.mean.size());
  for (std::size_t i = 0; i < params.mu; ++i) {
    step += params.weights[i] * (samples[ranking[i]].x - state.mean);
  }
  return state.mean + params.c_m * step;
}

double update_step_size(double step_size, const StrategyParams& params,
                        const Vector& path_sigma_new) {
  const double exponent =
      (params.c_sigma / params.d_sigma) * (path_sigma_new.norm() / params.chi_n - 1.0);
  const double next = step_size * std::exp(exponent);
  if (!std::isfinite(next) || !(next > 0.0)) {
    throw DecompositionFailure("step size left the finite positive range");
  }
  return next;
}

void symmetrize(Matrix& covariance) {
  const Matrix sym = 0.5 * (covariance + covariance.transpose());
  covariance = sym;
}

Matrix update_covariance(const DistributionState& state, const StrategyParams& params,
                         const std::vector<Sample>& samples, std::span<const std::size_t> ranking,
                         const Vector& path_c_new, bool h_sigma) {
  check_ranking(params, samples, ranking);
  const Matrix& c = state.covariance;
  const double delta = h_sigma ? 0.0 : params.c_1 * params.c_c * (2.0 - params.c_c);

  Matrix rank_mu = Matrix::Zero(c.rows(), c.cols());
  for (std::size_t i = 0; i < params.mu; ++i) {
    const Vector& y = samples[ranking[i]].y;
    rank_mu.noalias() += params.weights[i] * (y * y.transpose());
  }
  // sum_i w_i (y y^T - C) = rank_mu - C because the weights sum to one.
  Matrix next = (1.0 + delta) * c + params.c_1 * (path_c_new * path_c_new.transpose() - c) +
                params.c_mu * (rank_mu - c);
  symmetrize(next);
  return next;
}

void apply_cma_update(DistributionState& state, const StrategyParams& params,
                      const std::vector<Sample>& samples, std::span<const std::size_t> ranking) {
  PathUpdate paths = update_evolution_paths(state, params, samples, ranking);
  Vector mean = update_mean(state, params, samples, ranking);
  const double step = update_step_size(state.step_size, params, paths.path_sigma);
  Matrix cov = update_covariance(state, params, samples, ranking, paths.path_c, paths.h_sigma);

  state.mean = std::move(mean);
  state.step_size = step;
  state.covariance = std::move(cov);
  state.path_sigma = std::move(paths.path_sigma);
  state.path_c = std::move(paths.path_c);
  state.iteration += 1;
}

ReferenceCma::ReferenceCma(const Vector& mean, double step_size, const Matrix& covariance,
                           StrategyParams params, std::uint64_t seed)
    : state_(DistributionState::initial(mean, step_size, covariance)),
      params_(std::move(params)),
      rng_(seed) {
  if (params_.dim != state_.dim()) throw InvalidDimension("strategy params dim mismatch");
}

const std::vector<Sample>& ReferenceCma::ask() {
  if (awaiting_tell_) throw InvalidState("ask called twice without tell");
  pending_ = sample_population(state_, params_, rng_);
  awaiting_tell_ = true;
  return pending_;
}

void ReferenceCma::tell(std::span<const double> fitness) {
  if (!awaiting_tell_) throw InvalidState("tell called without a pending batch");
  if (fitness.size() != pending_.size()) {
    throw InvalidFitness("expected " + std::to_string(pending_.size()) + " fitness values");
  }
  const auto ranking = rank_samples(fitness);
  for (std::size_t i = 0; i < fitness.size(); ++i) pending_[i].fitness = fitness[i];
  apply_cma_update(state_, params_, pending_, ranking);
  awaiting_tell_ = false;
}

}  // namespace cmasop
