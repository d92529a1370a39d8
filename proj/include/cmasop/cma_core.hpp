#pragma once

// Reference CMA-ES state and update rules on raw real vectors. Nothing in
// this header knows about point sets or encodings.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cmasop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Fixed CMA-ES hyperparameters.
struct StrategyParams {
  std::size_t dim = 0;
  std::size_t lambda = 0;
  std::size_t mu = 0;
  std::vector<double> weights;  // mu positive, non-increasing, sum to 1
  double mu_eff = 0.0;
  double c_m = 1.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;
};

/// The Gaussian search distribution plus the two evolution paths.
struct DistributionState {
  Vector mean;
  double step_size = 1.0;
  Matrix covariance;
  Vector path_sigma;
  Vector path_c;
  std::size_t iteration = 0;

  /// Zero paths, iteration 0.
  static DistributionState initial(const Vector& mean, double step_size, const Matrix& covariance);
  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

struct Sample {
  Vector z;          // standard normal draw
  Vector y;          // sqrt(C) z
  Vector x;          // step_size * y + mean
  Vector encoded_x;  // filled by whoever encodes; equals x for pure CMA-ES
  double fitness = 0.0;
};

/// Symmetric eigendecomposition C = B diag(eigenvalues) B^T, computed once per
/// iteration and shared by sampling and the termination check.
class CovarianceFactor {
 public:
  /// Throws DecompositionFailure when C is not finite or not positive definite.
  explicit CovarianceFactor(const Matrix& covariance);

  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  double min_eigenvalue() const { return eigenvalues_.minCoeff(); }
  double max_eigenvalue() const { return eigenvalues_.maxCoeff(); }

  /// Symmetric square root B diag(sqrt(eigenvalues)) B^T.
  const Matrix& sqrt() const { return sqrt_; }

 private:
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Matrix sqrt_;
};

/// Throws InvalidDimension when dim == 0.
StrategyParams default_strategy_params(std::size_t dim);

double chi_n(std::size_t dim);

/// Draws params.lambda samples; z from rng, y = sqrt(C) z, x = sigma y + m.
std::vector<Sample> sample_population(const DistributionState& state, const StrategyParams& params,
                                      const CovarianceFactor& factor, Rng& rng);

/// Overload that factorizes state.covariance itself.
std::vector<Sample> sample_population(const DistributionState& state, const StrategyParams& params,
                                      Rng& rng);

/// Indices sorted by ascending fitness, ties kept in original order.
/// Throws InvalidFitness on NaN.
std::vector<std::size_t> rank_samples(std::span<const double> fitness);
std::vector<std::size_t> rank_samples(const std::vector<Sample>& samples);

/// True iff ||p_sigma|| / sqrt(1 - (1 - c_sigma)^(2(t+1))) < (1.4 + 2/(N+1)) chi_N.
bool heaviside(const Vector& path_sigma_new, double c_sigma, std::size_t iteration, std::size_t dim,
               double chi_n);

struct PathUpdate {
  Vector path_sigma;
  Vector path_c;
  bool h_sigma = true;
};

/// `ranking` holds sample indices best first; only the first mu are used.
PathUpdate update_evolution_paths(const DistributionState& state, const StrategyParams& params,
                                  const std::vector<Sample>& samples,
                                  std::span<const std::size_t> ranking);

/// Recombines the raw x vectors.
Vector update_mean(const DistributionState& state, const StrategyParams& params,
                   const std::vector<Sample>& samples, std::span<const std::size_t> ranking);

/// sigma * exp((c_sigma / d_sigma) (||p_sigma|| / chi_N - 1)). Throws
/// DecompositionFailure if the result is not a finite positive number.
double update_step_size(double step_size, const StrategyParams& params,
                        const Vector& path_sigma_new);

/// Rank-one plus rank-mu update, symmetrized before returning.
Matrix update_covariance(const DistributionState& state, const StrategyParams& params,
                         const std::vector<Sample>& samples, std::span<const std::size_t> ranking,
                         const Vector& path_c_new, bool h_sigma);

/// Replaces C with (C + C^T) / 2.
void symmetrize(Matrix& covariance);

/// One full generation of the update rules applied to an evaluated
/// population: paths, mean, step-size, covariance, iteration counter.
void apply_cma_update(DistributionState& state, const StrategyParams& params,
                      const std::vector<Sample>& samples, std::span<const std::size_t> ranking);

/// Plain ask-and-tell CMA-ES on R^N. Serves as the reference against which
/// the point-set optimizer is checked when its margin handling is disabled.
class ReferenceCma {
 public:
  ReferenceCma(const Vector& mean, double step_size, const Matrix& covariance,
               StrategyParams params, std::uint64_t seed);

  /// Samples a population. Throws InvalidState if the previous batch was not
  /// told yet and DecompositionFailure if C cannot be factorized.
  const std::vector<Sample>& ask();

  /// Consumes one fitness value per asked sample.
  void tell(std::span<const double> fitness);

  const DistributionState& state() const { return state_; }
  const StrategyParams& params() const { return params_; }

 private:
  DistributionState state_;
  StrategyParams params_;
  Rng rng_;
  std::vector<Sample> pending_;
  bool awaiting_tell_ = false;
};

}  // namespace cmasop
