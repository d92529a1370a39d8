#include "cmasop/benchmarks.hpp"

#include <cmath>
#include <random>

#include "cmasop/error.hpp"

namespace cmasop {

std::string_view to_string(Function f) {
  switch (f) {
    case Function::sphere: return "sphere";
    case Function::ellipsoid: return "ellipsoid";
    case Function::reversed_ellipsoid: return "reversed-ellipsoid";
    case Function::rosenbrock: return "rosenbrock";
  }
  return "unknown";
}

std::string_view to_string(Mode m) { return m == Mode::discrete ? "discrete" : "mixed"; }

Function parse_function(std::string_view name) {
  for (Function f : {Function::sphere, Function::ellipsoid, Function::reversed_ellipsoid,
                     Function::rosenbrock}) {
    if (name == to_string(f)) return f;
  }
  throw ConfigError("unknown function '" + std::string(name) + "'");
}

Mode parse_mode(std::string_view name) {
  if (name == "discrete") return Mode::discrete;
  if (name == "mixed") return Mode::mixed;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

namespace {

// 1000^{e / (N - 1)}; a single coordinate gets weight 1.
double conditioning(std::size_t exponent, std::size_t n) {
  if (n == 1) return 1.0;
  return std::pow(1000.0, static_cast<double>(exponent) / static_cast<double>(n - 1));
}

}  // namespace

double evaluate(Function f, const Vector& x) {
  const auto n = static_cast<std::size_t>(x.size());
  double sum = 0.0;
  switch (f) {
    case Function::sphere:
      return x.squaredNorm();
    case Function::ellipsoid:
      for (std::size_t i = 0; i < n; ++i) {
        const double v = conditioning(i, n) * x(static_cast<Eigen::Index>(i));
        sum += v * v;
      }
      return sum;
    case Function::reversed_ellipsoid:
      for (std::size_t i = 0; i < n; ++i) {
        const double v = conditioning(n - 1 - i, n) * x(static_cast<Eigen::Index>(i));
        sum += v * v;
      }
      return sum;
    case Function::rosenbrock:
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double a = x(i + 1) - x(i) * x(i);
        const double b = x(i) - 1.0;
        sum += 100.0 * a * a + b * b;
      }
      return sum;
  }
  return sum;
}

Vector optimum(Function f, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return f == Function::rosenbrock ? Vector::Ones(n) : Vector::Zero(n);
}

PointSet generate_point_set(std::size_t dim, std::size_t size, const Vector& optimum_block,
                            Rng& rng) {
  if (size == 0) throw ConfigError("point set size must be >= 1");
  if (static_cast<std::size_t>(optimum_block.size()) != dim) {
    throw ConfigError("optimum block length does not match the set dimension");
  }
  std::uniform_real_distribution<double> uniform(-5.0, 5.0);
  std::vector<Vector> points;
  points.reserve(size);
  auto taken = [&](const Vector& p) {
    if (p == optimum_block) return true;
    for (const auto& q : points) {
      if (q == p) return true;
    }
    return false;
  };
  while (points.size() + 1 < size) {
    Vector p(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = uniform(rng);
    if (!taken(p)) points.push_back(std::move(p));
  }
  points.push_back(optimum_block);
  return PointSet(std::move(points));
}

bool ProblemInstance::is_success(const Vector& encoded, double fitness) const {
  if (mode == Mode::mixed) return fitness <= mixed_success_threshold;
  return encoded == optimum;
}

ProblemInstance build_instance(Function function, std::size_t dim, std::size_t set_dim,
                               std::size_t set_size, Mode mode, std::uint64_t seed) {
  if (dim == 0 || set_dim == 0 || set_size == 0) {
    throw ConfigError("N, N_k and L_k must all be positive");
  }
  std::size_t sets = 0;
  if (mode == Mode::discrete) {
    if (dim % set_dim != 0) {
      throw ConfigError("discrete mode needs N_k to divide N (N=" + std::to_string(dim) +
                        ", N_k=" + std::to_string(set_dim) + ")");
    }
    sets = dim / set_dim;
  } else {
    sets = dim / set_dim / 2;
    if (sets == 0) throw ConfigError("mixed mode needs floor(N / N_k / 2) >= 1");
  }

  const Vector opt = optimum(function, dim);
  Rng rng(seed);
  std::vector<Subspace> subspaces;
  for (std::size_t k = 0; k < sets; ++k) {
    const Vector block = opt.segment(static_cast<Eigen::Index>(k * set_dim),
                                     static_cast<Eigen::Index>(set_dim));
    subspaces.emplace_back(generate_point_set(set_dim, set_size, block, rng));
  }
  if (mode == Mode::mixed) subspaces.emplace_back(Continuous{dim - sets * set_dim});

  return ProblemInstance{function, mode, dim, set_dim, set_size, seed,
                         SearchSpace(std::move(subspaces)), opt};
}

nlohmann::json instance_to_json(const ProblemInstance& instance) {
  nlohmann::json j = search_space_to_json(instance.space);
  j["instance"] = {{"function", to_string(instance.function)},
                   {"mode", to_string(instance.mode)},
                   {"N", instance.dim},
                   {"Nk", instance.set_dim},
                   {"Lk", instance.set_size},
                   {"seed", instance.seed}};
  return j;
}

}  // namespace cmasop
