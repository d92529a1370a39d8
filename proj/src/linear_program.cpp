#include "cmasop/linear_program.hpp"

#include <limits>
#include <vector>

#include "cmasop/error.hpp"

namespace cmasop {

LpResult maximize_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) throw InvalidDimension("maximize_lp: shape mismatch");
  if (m > 0 && b.minCoeff() < 0.0) throw ContractViolation("maximize_lp: b must be non-negative");

  constexpr double eps = 1e-12;
  const Eigen::Index cols = n + m;  // structural + slack; rhs stored separately

  // Rows 0..m-1 are constraints, row m is the negated objective.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, cols + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(cols).head(m) = b;
  t.row(m).head(n) = -c.transpose();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  LpResult result;
  const int max_iterations = 50 * static_cast<int>(cols + m + 10);
  int iter = 0;
  for (;; ++iter) {
    if (iter >= max_iterations) {
      result.status = LpStatus::iteration_limit;
      break;
    }
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (t(m, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) {
      result.status = LpStatus::optimal;
      break;
    }

    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double coef = t(i, enter);
      if (coef <= eps) continue;
      const double ratio = t(i, cols) / coef;
      if (ratio < best_ratio - eps ||
          (ratio <= best_ratio + eps && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = i;
      }
    }
    if (leave < 0) {
      result.status = LpStatus::unbounded;
      break;
    }

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  result.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index var = basis[static_cast<std::size_t>(i)];
    if (var < n) result.x(var) = t(i, cols);
  }
  result.value = c.dot(result.x);
  return result;
}

}  // namespace cmasop
