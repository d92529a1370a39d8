#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cmasop/error.hpp"
#include "cmasop/linear_program.hpp"

using cmasop::LpStatus;
using cmasop::maximize_lp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Best objective over all basic feasible points of {A x <= b, x >= 0, x <= box}.
double vertex_enumeration(const MatrixXd& a, const VectorXd& b, const VectorXd& c, double box) {
  const auto n = a.cols();
  // stack all constraints as G x <= h
  MatrixXd g(a.rows() + 2 * n, n);
  VectorXd h(a.rows() + 2 * n);
  g << a, -MatrixXd::Identity(n, n), MatrixXd::Identity(n, n);
  h << b, VectorXd::Zero(n), VectorXd::Constant(n, box);
  const auto rows = g.rows();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (true) {
    MatrixXd sub(n, n);
    VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      sub.row(i) = g.row(pick[static_cast<std::size_t>(i)]);
      rhs(i) = h(pick[static_cast<std::size_t>(i)]);
    }
    Eigen::FullPivLU<MatrixXd> lu(sub);
    if (lu.isInvertible()) {
      const VectorXd x = lu.solve(rhs);
      if (((g * x - h).array() <= 1e-9).all()) best = std::max(best, c.dot(x));
    }
    int k = static_cast<int>(n);
    while (k > 0 && pick[static_cast<std::size_t>(k - 1)] == rows - n + k - 1) --k;
    if (k == 0) break;
    ++pick[static_cast<std::size_t>(k - 1)];
    for (int r = k; r < n; ++r) pick[static_cast<std::size_t>(r)] = pick[static_cast<std::size_t>(r - 1)] + 1;
  }
  return best;
}

}  // namespace

TEST_CASE("small LPs by hand") {
  // max x + y, x + 2y <= 4, 3x + y <= 6  ->  (1.6, 1.2), value 2.8
  MatrixXd a(2, 2);
  a << 1, 2, 3, 1;
  VectorXd b(2);
  b << 4, 6;
  VectorXd c(2);
  c << 1, 1;
  const auto r = maximize_lp(a, b, c);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(2.8));
  CHECK(r.x(0) == doctest::Approx(1.6));
  CHECK(r.x(1) == doctest::Approx(1.2));

  // max x with only -x <= 1: unbounded
  MatrixXd u(1, 1);
  u << -1;
  VectorXd ub(1);
  ub << 1;
  VectorXd uc(1);
  uc << 1;
  CHECK(maximize_lp(u, ub, uc).status == LpStatus::unbounded);

  // all-zero right-hand side, degenerate at the origin
  MatrixXd d(3, 2);
  d << 1, -1, -1, 1, 1, 1;
  VectorXd db(3);
  db << 0, 0, 0;
  const auto dr = maximize_lp(d, db, c);
  REQUIRE(dr.status == LpStatus::optimal);
  CHECK(dr.value == doctest::Approx(0.0));
}

TEST_CASE("contract checks") {
  MatrixXd a(1, 1);
  a << 1;
  VectorXd b(1);
  b << -1;
  VectorXd c(1);
  c << 1;
  CHECK_THROWS_AS(maximize_lp(a, b, c), cmasop::ContractViolation);
  CHECK_THROWS_AS(maximize_lp(a, VectorXd::Ones(2), c), cmasop::InvalidDimension);
}

TEST_CASE("random LPs agree with vertex enumeration") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> rhs(0.0, 3.0);
  const double box = 1e4;
  int optimal = 0, unbounded = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 6);
    MatrixXd a(m, n);
    VectorXd b(m), c(n);
    for (auto& v : a.reshaped()) v = coef(rng);
    for (auto& v : b) v = rng() % 4 == 0 ? 0.0 : rhs(rng);
    for (auto& v : c) v = coef(rng);
    const auto r = maximize_lp(a, b, c);
    const double reference = vertex_enumeration(a, b, c, box);
    INFO("trial " << t);
    if (reference > box * 1e-2) {
      // optimum pinned by the artificial box: the LP itself is unbounded
      CHECK(r.status == LpStatus::unbounded);
      ++unbounded;
    } else {
      REQUIRE(r.status == LpStatus::optimal);
      CHECK(r.value == doctest::Approx(reference).epsilon(1e-9).scale(1.0));
      CHECK(((a * r.x - b).array() <= 1e-9).all());
      CHECK((r.x.array() >= -1e-12).all());
      CHECK(c.dot(r.x) == doctest::Approx(r.value).scale(1.0));
      ++optimal;
    }
  }
  CHECK(optimal > 100);
  CHECK(unbounded > 20);
}
