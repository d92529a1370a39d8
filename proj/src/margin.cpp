#include "cmasop/margin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmasop/error.hpp"
#include "cmasop/normal.hpp"

namespace cmasop {

MarginState MarginState::initial(const SearchSpace& space, std::size_t lambda) {
  const double n = static_cast<double>(space.total_dim());
  MarginState m;
  m.alpha_target = 1.0 / (static_cast<double>(lambda) * n);
  m.beta = 1.0 + 1.0 / n;
  std::size_t sets = 0;
  for (std::size_t k = 0; k < space.num_subspaces(); ++k) sets += space.is_point_set(k) ? 1 : 0;
  m.alpha.assign(sets, std::clamp(m.alpha_target, m.alpha_min, m.alpha_max));
  return m;
}

Vector midpoint(const Vector& mean_block, const Vector& neighbor) {
  if (mean_block.size() != neighbor.size()) throw InvalidDimension("midpoint: length mismatch");
  return 0.5 * (mean_block + neighbor);
}

Vector xi_direction(const Vector& mean, const Vector& midpoint_block, double step_size,
                    const SearchSpace& space, std::size_t k) {
  if (!(step_size > 0.0)) throw ContractViolation("xi_direction: step size must be positive");
  const auto off = static_cast<Eigen::Index>(space.offset(k));
  const auto len = static_cast<Eigen::Index>(space.block_dim(k));
  if (midpoint_block.size() != len) throw InvalidDimension("xi_direction: block length mismatch");
  Vector xi = Vector::Zero(static_cast<Eigen::Index>(space.total_dim()));
  xi.segment(off, len) = (midpoint_block - mean.segment(off, len)) / step_size;
  return xi;
}

double mahalanobis_distance(const Matrix& covariance, const Vector& xi) {
  return std::sqrt(CovarianceCholesky(covariance).quadratic_form(xi));
}

double marginal_probability(double d) { return normal_cdf(-d); }

double margin_gamma(double alpha) { return -normal_ppf(alpha); }

Matrix correct_covariance(const Matrix& covariance, const Vector& xi, double d, double gamma) {
  if (!(gamma > 0.0)) throw ContractViolation("correct_covariance: gamma must be positive");
  if (d < gamma) throw ContractViolation("correct_covariance: requires d >= gamma");
  const double d2 = d * d;
  const double g2 = gamma * gamma;
  const double coefficient = (d2 - g2) / (d2 * g2);
  Matrix out = covariance;
  out.noalias() += coefficient * (xi * xi.transpose());
  symmetrize(out);
  return out;
}

CovarianceCholesky::CovarianceCholesky(const Matrix& covariance) : llt_(covariance) {
  if (llt_.info() != Eigen::Success) {
    throw DecompositionFailure("covariance is not positive definite (Cholesky failed)");
  }
}

double CovarianceCholesky::quadratic_form(const Vector& xi, std::size_t offset) const {
  const auto n = xi.size();
  const auto off = static_cast<Eigen::Index>(offset);
  // L v = xi has v = 0 above `offset` when xi is zero there.
  const auto lower = llt_.matrixLLT().bottomRightCorner(n - off, n - off)
                         .template triangularView<Eigen::Lower>();
  const Vector v = lower.solve(xi.tail(n - off));
  return v.squaredNorm();
}

void CovarianceCholesky::rank_one_update(double coefficient, const Vector& xi) {
  if (coefficient == 0.0) return;
  llt_.rankUpdate(xi, coefficient);
  if (llt_.info() != Eigen::Success) throw DecompositionFailure("Cholesky rank-one update failed");
}

MarginCorrectionResult apply_margin_correction(DistributionState& state, const SearchSpace& space,
                                               double alpha_k, std::size_t k, Rng& rng,
                                               CovarianceCholesky& cholesky) {
  const PointSet& set = space.point_set(k);
  const std::size_t off = space.offset(k);
  const auto off_i = static_cast<Eigen::Index>(off);
  const auto len = static_cast<Eigen::Index>(set.dim());

  MarginCorrectionResult result;
  const std::size_t closest = space.closest_point_to_mean(state.mean, k);
  result.neighbors = space.neighbors(k, closest);
  if (result.neighbors.count() == 0) return result;

  const Vector mean_block = state.mean.segment(off_i, len);
  auto direction_to = [&](std::size_t j) {
    CorrectionDirection dir;
    dir.midpoint = midpoint(mean_block, set[j]);
    dir.xi = xi_direction(state.mean, dir.midpoint, state.step_size, space, k);
    dir.mahalanobis = std::sqrt(std::max(0.0, cholesky.quadratic_form(dir.xi, off)));
    dir.prob = marginal_probability(dir.mahalanobis);
    return dir;
  };

  result.order = result.neighbors.neighbors;
  std::shuffle(result.order.begin(), result.order.end(), rng);

  const double gamma = margin_gamma(alpha_k);
  for (std::size_t j : result.order) {
    const CorrectionDirection dir = direction_to(j);
    // Phi(-d) < alpha  <=>  d > gamma
    const bool correct = dir.mahalanobis > gamma;
    result.corrected.push_back(correct);
    if (!correct) continue;

    const double d2 = dir.mahalanobis * dir.mahalanobis;
    const double g2 = gamma * gamma;
    const double coefficient = (d2 - g2) / (d2 * g2);
    // xi vanishes outside the block, so only the block of C changes.
    const Vector xi_block = dir.xi.segment(off_i, len);
    auto block = state.covariance.block(off_i, off_i, len, len);
    block.noalias() += coefficient * (xi_block * xi_block.transpose());
    const Matrix sym = 0.5 * (Matrix(block) + Matrix(block).transpose());
    block = sym;
    cholesky.rank_one_update(coefficient, dir.xi);
  }

  for (std::size_t j : result.neighbors.neighbors) {
    result.directions.push_back(direction_to(j));
    result.probabilities.push_back(result.directions.back().prob);
  }
  return result;
}

MarginCorrectionResult apply_margin_correction(DistributionState& state, const SearchSpace& space,
                                               double alpha_k, std::size_t k, Rng& rng) {
  CovarianceCholesky cholesky(state.covariance);
  return apply_margin_correction(state, space, alpha_k, k, rng, cholesky);
}

double adapt_margin(double alpha_k, const std::vector<double>& probs, double alpha_target,
                    double beta, double alpha_min, double alpha_max) {
  if (probs.empty()) return alpha_k;
  const double mean_prob =
      std::accumulate(probs.begin(), probs.end(), 0.0) / static_cast<double>(probs.size());
  const double next = (alpha_target <= mean_prob) ? alpha_k / beta : beta * alpha_k;
  return std::clamp(next, alpha_min, alpha_max);
}

}  // namespace cmasop
