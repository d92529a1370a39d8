#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cmasop/cma_core.hpp"
#include "cmasop/search_space.hpp"

namespace cmasop {

enum class Function { sphere, ellipsoid, reversed_ellipsoid, rosenbrock };
enum class Mode { discrete, mixed };

std::string_view to_string(Function f);
std::string_view to_string(Mode m);
/// Throws ConfigError on an unknown name.
Function parse_function(std::string_view name);
Mode parse_mode(std::string_view name);

double evaluate(Function f, const Vector& x);

/// Global minimizer: zero for sphere and both ellipsoids, all-ones for rosenbrock.
Vector optimum(Function f, std::size_t dim);

/// L_k - 1 i.i.d. uniform points on [-5, 5]^{N_k} followed by `optimum_block`.
/// Draws that coincide with an earlier point are redrawn.
PointSet generate_point_set(std::size_t dim, std::size_t size, const Vector& optimum_block, Rng& rng);

struct ProblemInstance {
  Function function = Function::sphere;
  Mode mode = Mode::discrete;
  std::size_t dim = 0;
  std::size_t set_dim = 0;   // N_k
  std::size_t set_size = 0;  // L_k
  std::uint64_t seed = 0;
  SearchSpace space;
  Vector optimum;

  double evaluate(const Vector& x) const { return cmasop::evaluate(function, x); }
  /// Discrete: the encoded solution is the global optimum. Mixed: fitness <= 1e-4.
  bool is_success(const Vector& encoded, double fitness) const;
};

inline constexpr double mixed_success_threshold = 1e-4;

/// Discrete: K = N / N_k point sets (N_k must divide N). Mixed: floor(N / N_k / 2)
/// point sets (at least one) followed by one continuous block. Every point set
/// contains the matching block of the optimum. Throws ConfigError otherwise.
ProblemInstance build_instance(Function function, std::size_t dim, std::size_t set_dim,
                               std::size_t set_size, Mode mode, std::uint64_t seed);

/// Search-space JSON plus an "instance" header with function, mode, sizes and seed.
nlohmann::json instance_to_json(const ProblemInstance& instance);

}  // namespace cmasop
