#pragma once

// Margin correction: rank-one enlargements of the covariance that keep the
// marginal probability beyond every mid-point between the mean and a Voronoi
// neighbor of the mean's closest point at or above alpha_k. Margin
// adaptation then steers alpha_k so that the average of those probabilities
// tracks alpha_target.

#include <cstddef>
#include <vector>

#include "cmasop/cma_core.hpp"
#include "cmasop/search_space.hpp"

namespace cmasop {

struct MarginState {
  static constexpr double default_alpha_min = 1e-12;
  static constexpr double default_alpha_max = 0.49;

  std::vector<double> alpha;  // one per point-set subspace, in subspace order
  double alpha_target = 0.0;
  double beta = 1.0;
  double alpha_min = default_alpha_min;
  double alpha_max = default_alpha_max;

  /// alpha_target = 1 / (lambda N), beta = 1 + 1 / N, every alpha_k = alpha_target.
  static MarginState initial(const SearchSpace& space, std::size_t lambda);
};

struct CorrectionDirection {
  Vector xi;         // zero outside the subspace block
  Vector midpoint;   // in subspace coordinates
  double mahalanobis = 0.0;
  double prob = 0.5;
};

Vector midpoint(const Vector& mean_block, const Vector& neighbor);

/// Zero-padded (midpoint - mean_k) / step_size.
Vector xi_direction(const Vector& mean, const Vector& midpoint_block, double step_size,
                    const SearchSpace& space, std::size_t k);

/// sqrt(xi^T C^{-1} xi). Throws DecompositionFailure if C is not positive definite.
double mahalanobis_distance(const Matrix& covariance, const Vector& xi);

/// Phi(-d).
double marginal_probability(double d);

/// gamma = Phi^{-1}(1 - alpha), computed as -Phi^{-1}(alpha).
double margin_gamma(double alpha);

/// C + ((d^2 - gamma^2) / (d^2 gamma^2)) xi xi^T, symmetrized. d == gamma
/// leaves C unchanged. Throws ContractViolation if d < gamma or gamma <= 0.
Matrix correct_covariance(const Matrix& covariance, const Vector& xi, double d, double gamma);

/// Cholesky factor of C kept alongside C while a sequence of rank-one
/// corrections is applied. Factorized on construction, then updated in place
/// after each correction.
class CovarianceCholesky {
 public:
  /// Throws DecompositionFailure if C is not positive definite.
  explicit CovarianceCholesky(const Matrix& covariance);

  /// xi^T C^{-1} xi for an xi that is zero before index `offset`.
  double quadratic_form(const Vector& xi, std::size_t offset = 0) const;

  /// Follows C <- C + coefficient xi xi^T (coefficient >= 0).
  void rank_one_update(double coefficient, const Vector& xi);

 private:
  Eigen::LLT<Matrix> llt_;
};

struct MarginCorrectionResult {
  NeighborSet neighbors;
  std::vector<std::size_t> order;    // neighbor indices in the order they were visited
  std::vector<bool> corrected;       // parallel to `order`
  // Per neighbor in neighbors.neighbors order, measured after the whole pass.
  std::vector<CorrectionDirection> directions;
  std::vector<double> probabilities;
};

/// Runs the correction pass for point-set subspace k on state.covariance,
/// using the already-updated mean and step-size. Neighbors are visited in an
/// rng-shuffled order; each distance is measured against the covariance as
/// corrected so far. `cholesky` must factor state.covariance on entry and
/// factors the corrected covariance on exit.
MarginCorrectionResult apply_margin_correction(DistributionState& state, const SearchSpace& space,
                                               double alpha_k, std::size_t k, Rng& rng,
                                               CovarianceCholesky& cholesky);

/// Convenience overload that factorizes state.covariance itself.
MarginCorrectionResult apply_margin_correction(DistributionState& state, const SearchSpace& space,
                                               double alpha_k, std::size_t k, Rng& rng);

/// alpha / beta if alpha_target <= mean(probs), beta * alpha otherwise, then
/// clamped to [alpha_min, alpha_max]. Empty `probs` leaves alpha unchanged.
double adapt_margin(double alpha_k, const std::vector<double>& probs, double alpha_target,
                    double beta, double alpha_min = MarginState::default_alpha_min,
                    double alpha_max = MarginState::default_alpha_max);

}  // namespace cmasop
