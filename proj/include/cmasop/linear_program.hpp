#pragma once

#include <Eigen/Dense>

namespace cmasop {

enum class LpStatus { optimal, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  double value = 0.0;
  Eigen::VectorXd x;
};

/// Dense primal simplex for
///
///   maximize c^T x  subject to  A x <= b,  x >= 0
///
/// with b >= 0, so that the origin is a feasible starting vertex. Bland's
/// rule is used for both pivot choices; problems here are tiny (tens of rows)
/// and highly degenerate, so termination matters more than speed.
LpResult maximize_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace cmasop
