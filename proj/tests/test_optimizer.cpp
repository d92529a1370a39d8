#include <doctest.h>

#include <cmath>
#include <vector>

#include "cmasop/error.hpp"
#include "cmasop/optimizer.hpp"

using namespace cmasop;

namespace {

PointSet random_set(std::size_t dim, std::size_t size, Rng& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Eigen::VectorXd> pts;
  for (std::size_t i = 0; i < size; ++i) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
    for (auto& v : p) v = u(rng);
    pts.push_back(p);
  }
  pts.back().setZero();
  return PointSet(pts);
}

SearchSpace discrete_space(std::size_t blocks, std::size_t dim, std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Subspace> s;
  for (std::size_t k = 0; k < blocks; ++k) s.emplace_back(random_set(dim, size, rng));
  return SearchSpace(s);
}

double sphere(const Vector& x) { return x.squaredNorm(); }

std::vector<double> evaluate(const std::vector<Vector>& batch) {
  std::vector<double> f;
  for (const auto& x : batch) f.push_back(sphere(x));
  return f;
}

}  // namespace

TEST_CASE("termination precedence") {
  CHECK(check_termination(false, 100000, 100000, 1.0, 1.0, 1e-30, false) ==
        TerminationReason::evaluation_budget);
  CHECK(check_termination(false, 99999, 100000, 1.0, 1.0, 1e-30, false) ==
        TerminationReason::still_running);
  CHECK(check_termination(false, 10, 100000, 1e-16, 1.0, 1e-30, false) ==
        TerminationReason::eigenvalue_collapse);
  CHECK(check_termination(true, 100000, 100000, 1e-16, 1.0, 1e-30, true) == TerminationReason::success);
  CHECK(check_termination(false, 10, 100000, 1.0, 1.0, 1e-30, true) == TerminationReason::numerical_error);
  CHECK(check_termination(false, 10, 100000, 1e-16, 1.0, 1e-30, true) ==
        TerminationReason::eigenvalue_collapse);
  CHECK(check_termination(false, 10, 100000, 1.0, std::nan(""), 1e-30, false) ==
        TerminationReason::still_running);
  CHECK(to_string(TerminationReason::eigenvalue_collapse) == "eigenvalue-collapse");
  CHECK(to_string(TerminationReason::evaluation_budget) == "evaluation-budget");
  CHECK(to_string(TerminationReason::numerical_error) == "numerical-error");
  CHECK(to_string(TerminationReason::still_running) == "still-running");
  CHECK(to_string(TerminationReason::success) == "success");
}

TEST_CASE("fresh optimizer and config checks") {
  const SearchSpace space({Continuous{10}});
  auto cfg = OptimizerConfig::defaults(space, Vector::Constant(10, 3.0), 2.0, 1);
  CHECK(cfg.max_evaluations == 100000);
  CHECK(cfg.min_eigenvalue_threshold == 1e-30);
  SopOptimizer opt(cfg);
  CHECK(opt.termination() == TerminationReason::still_running);
  CHECK(opt.ask().size() == 10);

  auto tiny = OptimizerConfig::defaults(space, Vector::Constant(10, 3.0), 1e-16, 1);
  CHECK(SopOptimizer(tiny).termination() == TerminationReason::eigenvalue_collapse);

  auto bad = cfg;
  bad.initial_mean = Vector::Zero(3);
  CHECK_THROWS_AS(SopOptimizer{bad}, ConfigError);
  bad = cfg;
  bad.max_evaluations = 5;
  CHECK_THROWS_AS(SopOptimizer{bad}, ConfigError);
  bad = cfg;
  bad.initial_step_size = -1.0;
  CHECK_THROWS_AS(SopOptimizer{bad}, ConfigError);
  bad = cfg;
  bad.initial_covariance = -Matrix::Identity(10, 10);
  CHECK_THROWS_AS(SopOptimizer{bad}, DecompositionFailure);
}

TEST_CASE("ask/tell contract") {
  const SearchSpace space({Continuous{3}});
  SopOptimizer opt(OptimizerConfig::defaults(space, Vector::Ones(3), 1.0, 2));
  CHECK_THROWS_AS(opt.tell(std::vector<double>(7, 0.0)), InvalidState);
  const auto batch = opt.ask();
  CHECK_THROWS_AS(opt.ask(), InvalidState);
  CHECK_THROWS_AS(opt.tell(std::vector<double>(batch.size() - 1, 0.0)), InvalidFitness);
  auto f = evaluate(batch);
  f[2] = std::nan("");
  CHECK_THROWS_AS(opt.tell(f), InvalidFitness);
  // the batch is still pending after a rejected tell
  opt.tell(evaluate(batch));
  CHECK(opt.state().iteration == 1);
  CHECK(opt.evaluations() == batch.size());

  auto cfg = OptimizerConfig::defaults(space, Vector::Ones(3), 1.0, 2);
  cfg.max_evaluations = cfg.strategy.lambda;
  SopOptimizer once(cfg);
  once.tell(evaluate(once.ask()));
  CHECK(once.termination() == TerminationReason::evaluation_budget);
  CHECK_THROWS_AS(once.ask(), InvalidState);
}

TEST_CASE("continuous candidates are the raw samples") {
  const SearchSpace space({Continuous{2}, Continuous{3}});
  SopOptimizer opt(OptimizerConfig::defaults(space, Vector::Ones(5), 1.0, 3));
  const auto batch = opt.ask();
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(batch[i] == opt.samples()[i].x);
}

TEST_CASE("margin off matches the reference CMA-ES bit for bit") {
  const std::size_t n = 6;
  const SearchSpace space({Continuous{2}, Continuous{4}});
  auto cfg = OptimizerConfig::defaults(space, Vector::Constant(n, 2.0), 1.5, 31);
  cfg.margin_enabled = false;
  SopOptimizer opt(cfg);
  ReferenceCma ref(Vector::Constant(n, 2.0), 1.5, Matrix::Identity(n, n), default_strategy_params(n), 31);
  for (int it = 0; it < 200; ++it) {
    const auto batch = opt.ask();
    const auto& ref_batch = ref.ask();
    REQUIRE(batch.size() == ref_batch.size());
    std::vector<double> f;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      REQUIRE(batch[i] == ref_batch[i].x);
      f.push_back(sphere(batch[i]));
    }
    opt.tell(f);
    ref.tell(f);
    REQUIRE(opt.state().mean == ref.state().mean);
    REQUIRE(opt.state().step_size == ref.state().step_size);
    REQUIRE(opt.state().covariance == ref.state().covariance);
    REQUIRE(opt.state().path_c == ref.state().path_c);
  }
}

TEST_CASE("naive arm is the reference CMA-ES fed encoded fitness") {
  const SearchSpace space = discrete_space(3, 2, 10, 4);
  auto cfg = OptimizerConfig::defaults(space, Vector::Constant(6, 3.0), 2.0, 8);
  cfg.margin_enabled = false;
  SopOptimizer opt(cfg);
  ReferenceCma ref(Vector::Constant(6, 3.0), 2.0, Matrix::Identity(6, 6), default_strategy_params(6), 8);
  for (int it = 0; it < 100 && !opt.terminated(); ++it) {
    const auto batch = opt.ask();
    const auto& ref_batch = ref.ask();
    std::vector<double> f;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      REQUIRE(batch[i] == space.encode(ref_batch[i].x));
      f.push_back(sphere(batch[i]));
    }
    opt.tell(f);
    ref.tell(f);
    REQUIRE(opt.state().covariance == ref.state().covariance);
    REQUIRE(opt.state().mean == ref.state().mean);
  }
}

TEST_CASE("single-point sets reduce to pure CMA-ES") {
  std::vector<Eigen::VectorXd> one{Eigen::Vector2d(1.0, -1.0)};
  const SearchSpace space({PointSet(one), Continuous{3}});
  auto cfg = OptimizerConfig::defaults(space, Vector::Constant(5, 1.0), 1.0, 5);
  SopOptimizer opt(cfg);
  ReferenceCma ref(Vector::Constant(5, 1.0), 1.0, Matrix::Identity(5, 5), default_strategy_params(5), 5);
  for (int it = 0; it < 50; ++it) {
    const auto batch = opt.ask();
    const auto& ref_batch = ref.ask();
    std::vector<double> f;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      REQUIRE(batch[i].head(2) == Eigen::Vector2d(1.0, -1.0));
      f.push_back(sphere(batch[i]));
    }
    opt.tell(f);
    ref.tell(f);
    REQUIRE(opt.state().covariance == ref.state().covariance);
    REQUIRE(opt.margin().alpha == cfg.margin.alpha);
  }
}

TEST_CASE("determinism") {
  const SearchSpace space = discrete_space(2, 2, 10, 6);
  auto run = [&](std::uint64_t seed) {
    SopOptimizer opt(OptimizerConfig::defaults(space, Vector::Constant(4, 3.0), 2.0, seed));
    std::vector<Vector> means;
    for (int it = 0; it < 60 && !opt.terminated(); ++it) {
      opt.tell(evaluate(opt.ask()));
      means.push_back(opt.state().mean);
    }
    return std::make_pair(means, opt.state().covariance);
  };
  const auto a = run(10), b = run(10), c = run(11);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first != c.first);
}

TEST_CASE("margin floor with fixed margins") {
  const SearchSpace space = discrete_space(4, 2, 10, 7);
  auto cfg = OptimizerConfig::defaults(space, Vector::Constant(8, 3.0), 2.0, 12);
  cfg.adaptation_enabled = false;
  SopOptimizer opt(cfg);
  const double target = cfg.margin.alpha_target;
  std::size_t checked = 0;
  for (int it = 0; it < 300 && !opt.terminated(); ++it) {
    opt.tell(evaluate(opt.ask()));
    REQUIRE(opt.last_corrections().size() == 4);
    for (const auto& corr : opt.last_corrections()) {
      for (double p : corr.probabilities) {
        CHECK(p >= target - 1e-8);
        ++checked;
      }
    }
    CHECK(opt.margin().alpha == cfg.margin.alpha);
  }
  CHECK(checked > 1000);
}

TEST_CASE("margin adaptation moves alpha") {
  const SearchSpace space = discrete_space(3, 2, 10, 9);
  SopOptimizer opt(OptimizerConfig::defaults(space, Vector::Constant(6, 3.0), 2.0, 13));
  const auto start = opt.margin().alpha;
  for (int it = 0; it < 50 && !opt.terminated(); ++it) opt.tell(evaluate(opt.ask()));
  CHECK(opt.margin().alpha != start);
  for (double a : opt.margin().alpha) {
    CHECK(a >= opt.margin().alpha_min);
    CHECK(a <= opt.margin().alpha_max);
  }
}

TEST_CASE("best so far and success bookkeeping") {
  const SearchSpace space = discrete_space(2, 2, 10, 1);
  auto cfg = OptimizerConfig::defaults(space, Vector::Constant(4, 3.0), 2.0, 21);
  cfg.success = [](const Vector& x, double) { return x.isZero(0.0); };
  SopOptimizer opt(cfg);
  double last = std::numeric_limits<double>::infinity();
  while (!opt.terminated()) {
    const auto batch = opt.ask();
    const auto f = evaluate(batch);
    const std::size_t before = opt.evaluations();
    opt.tell(f);
    CHECK(opt.best().fitness <= last);
    last = opt.best().fitness;
    CHECK(sphere(opt.best().solution) == opt.best().fitness);
    if (opt.success_evaluations()) {
      // first zero candidate of the batch
      std::size_t first = 0;
      while (!batch[first].isZero(0.0)) ++first;
      CHECK(*opt.success_evaluations() == before + first + 1);
    }
  }
  CHECK(opt.termination() == TerminationReason::success);
  CHECK(opt.best().fitness == 0.0);
}

TEST_CASE("snapshot") {
  const SearchSpace space = discrete_space(2, 2, 10, 2);
  SopOptimizer opt(OptimizerConfig::defaults(space, Vector::Constant(4, 3.0), 2.0, 3));
  opt.tell(evaluate(opt.ask()));
  const auto s = opt.snapshot();
  CHECK(s.iteration == 1);
  CHECK(s.evaluations == opt.params().lambda);
  CHECK(s.step_size == opt.state().step_size);
  CHECK(s.alpha.size() == 2);
  CHECK(s.min_eigenvalue <= s.max_eigenvalue);
  CHECK(s.min_eigenvalue > 0.0);
}
