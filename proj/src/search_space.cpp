#include "cmasop/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "cmasop/error.hpp"
#include "cmasop/linear_program.hpp"

namespace cmasop {

using Eigen::MatrixXd;
using Eigen::VectorXd;

PointSet::PointSet(std::vector<VectorXd> points) : points_(std::move(points)) {
  if (points_.empty()) throw ConfigError("point set must contain at least one point");
  dim_ = static_cast<std::size_t>(points_.front().size());
  if (dim_ == 0) throw ConfigError("point set points must have dimension >= 1");
  for (const auto& p : points_) {
    if (static_cast<std::size_t>(p.size()) != dim_) {
      throw ConfigError("point set points have different dimensions");
    }
    if (!p.allFinite()) throw ConfigError("point set contains a non-finite coordinate");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t j = i + 1; j < points_.size(); ++j) {
      if (points_[i] == points_[j]) {
        throw ConfigError("point set contains duplicate points " + std::to_string(i) + " and " +
                          std::to_string(j));
      }
    }
  }
}

std::size_t PointSet::nearest_index(const Eigen::Ref<const VectorXd>& x) const {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = (points_[i] - x).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

std::size_t subspace_dim(const Subspace& s) {
  return std::visit(
      [](const auto& sub) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(sub)>, PointSet>) {
          return sub.dim();
        } else {
          return sub.dim;
        }
      },
      s);
}

namespace {

// Largest t such that some q on the bisector of sites `closest` and `j` is at
// distance >= t from every other bisector (closest, l), measured on the side
// of `closest`. Coordinates are pre-centered on `closest` and scaled to unit
// radius, and t is capped at 1.
double facet_clearance(const std::vector<VectorXd>& centered, std::size_t closest, std::size_t j) {
  const VectorXd& pj = centered[j];
  const auto n = pj.size();

  // Bisector {q : 2 pj.q = |pj|^2} = q0 + span(U).
  const VectorXd q0 = 0.5 * pj;
  MatrixXd basis(n, n - 1);
  if (n > 1) {
    const MatrixXd column = pj;
    Eigen::HouseholderQR<MatrixXd> qr(column);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
    basis = q.rightCols(n - 1);
  }

  std::vector<std::size_t> others;
  for (std::size_t l = 0; l < centered.size(); ++l) {
    if (l != closest && l != j) others.push_back(l);
  }
  if (others.empty()) return 1.0;

  // Rows: a_l.(q0 + U u) + |a_l| t <= b_l with a_l = 2 p_l, b_l = |p_l|^2.
  const auto m = static_cast<Eigen::Index>(others.size());
  MatrixXd coef_u(m, n - 1);
  VectorXd norm_a(m), rhs(m);
  double shift = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const VectorXd& pl = centered[others[static_cast<std::size_t>(r)]];
    const VectorXd a = 2.0 * pl;
    coef_u.row(r) = (a.transpose() * basis);
    norm_a(r) = a.norm();
    rhs(r) = pl.squaredNorm() - a.dot(q0);
    shift = std::max(shift, -rhs(r) / norm_a(r));
  }

  // t = t' - shift with t' >= 0 makes the origin feasible; u = u+ - u-.
  constexpr double cap = 1.0;
  const Eigen::Index nu = n - 1;
  MatrixXd a(m + 1, 2 * nu + 1);
  VectorXd b(m + 1);
  a.setZero();
  a.block(0, 0, m, nu) = coef_u;
  a.block(0, nu, m, nu) = -coef_u;
  a.block(0, 2 * nu, m, 1) = norm_a;
  b.head(m) = (rhs.array() + norm_a.array() * shift).cwiseMax(0.0).matrix();
  a(m, 2 * nu) = 1.0;
  b(m) = shift + cap;

  VectorXd objective = VectorXd::Zero(2 * nu + 1);
  objective(2 * nu) = 1.0;
  const LpResult lp = maximize_lp(a, b, objective);
  if (lp.status != LpStatus::optimal) {
    throw DecompositionFailure("Voronoi facet program did not reach an optimum");
  }
  return lp.value - shift;
}

}  // namespace

NeighborSet voronoi_neighbors(const PointSet& set, std::size_t closest) {
  if (closest >= set.size()) throw InvalidSubspace("closest index out of range");
  NeighborSet result;
  result.closest = closest;
  if (set.size() == 1) return result;

  const VectorXd& origin = set[closest];
  double radius = 0.0;
  for (const auto& p : set.points()) radius = std::max(radius, (p - origin).norm());
  std::vector<VectorXd> centered;
  centered.reserve(set.size());
  for (const auto& p : set.points()) centered.push_back((p - origin) / radius);

  constexpr double tolerance = 1e-9;
  for (std::size_t j = 0; j < set.size(); ++j) {
    if (j == closest) continue;
    if (facet_clearance(centered, closest, j) > tolerance) result.neighbors.push_back(j);
  }
  return result;
}

VectorXd encode_subspace(const Eigen::Ref<const VectorXd>& x_k, const Subspace& subspace) {
  if (static_cast<std::size_t>(x_k.size()) != subspace_dim(subspace)) {
    throw InvalidDimension("block length does not match the subspace dimension");
  }
  if (const auto* set = std::get_if<PointSet>(&subspace)) return (*set)[set->nearest_index(x_k)];
  return x_k;
}

SearchSpace::SearchSpace(std::vector<Subspace> subspaces) : subspaces_(std::move(subspaces)) {
  if (subspaces_.empty()) throw ConfigError("search space needs at least one subspace");
  offsets_.reserve(subspaces_.size());
  for (const auto& s : subspaces_) {
    const std::size_t d = subspace_dim(s);
    if (d == 0) throw ConfigError("subspace dimension must be >= 1");
    offsets_.push_back(total_dim_);
    total_dim_ += d;
  }
}

const PointSet& SearchSpace::point_set(std::size_t k) const {
  if (k >= subspaces_.size()) throw InvalidSubspace("subspace index out of range");
  const auto* set = std::get_if<PointSet>(&subspaces_[k]);
  if (set == nullptr) {
    throw InvalidSubspace("subspace " + std::to_string(k) + " is continuous, not a point set");
  }
  return *set;
}

VectorXd SearchSpace::encode(const Eigen::Ref<const VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != total_dim_) {
    throw InvalidDimension("vector length does not match the search space");
  }
  VectorXd out(x.size());
  for (std::size_t k = 0; k < subspaces_.size(); ++k) {
    const auto off = static_cast<Eigen::Index>(offsets_[k]);
    const auto d = static_cast<Eigen::Index>(block_dim(k));
    out.segment(off, d) = encode_subspace(x.segment(off, d), subspaces_[k]);
  }
  return out;
}

std::size_t SearchSpace::closest_point_to_mean(const Eigen::Ref<const VectorXd>& mean,
                                               std::size_t k) const {
  const PointSet& set = point_set(k);
  if (static_cast<std::size_t>(mean.size()) != total_dim_) {
    throw InvalidDimension("mean length does not match the search space");
  }
  return set.nearest_index(mean.segment(static_cast<Eigen::Index>(offsets_[k]),
                                        static_cast<Eigen::Index>(set.dim())));
}

const NeighborSet& SearchSpace::neighbors(std::size_t k, std::size_t closest) const {
  const PointSet& set = point_set(k);
  std::lock_guard lock(cache_->mutex);
  auto& slot = cache_->entries[{k, closest}];
  if (!slot) slot = std::make_unique<NeighborSet>(voronoi_neighbors(set, closest));
  return *slot;
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
  try {
    std::vector<Subspace> subspaces;
    for (const auto& s : j.at("subspaces")) {
      const auto type = s.at("type").get<std::string>();
      if (type == "points") {
        std::vector<VectorXd> points;
        for (const auto& p : s.at("points")) {
          const auto coords = p.get<std::vector<double>>();
          points.push_back(Eigen::Map<const VectorXd>(coords.data(),
                                                      static_cast<Eigen::Index>(coords.size())));
        }
        subspaces.emplace_back(PointSet(std::move(points)));
      } else if (type == "continuous") {
        subspaces.emplace_back(Continuous{s.at("dim").get<std::size_t>()});
      } else {
        throw ConfigError("unknown subspace type '" + type + "'");
      }
    }
    return SearchSpace(std::move(subspaces));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed search space JSON: ") + e.what());
  }
}

nlohmann::json search_space_to_json(const SearchSpace& space) {
  nlohmann::json subspaces = nlohmann::json::array();
  for (const auto& s : space.subspaces()) {
    if (const auto* set = std::get_if<PointSet>(&s)) {
      nlohmann::json points = nlohmann::json::array();
      for (const auto& p : set->points()) points.push_back(std::vector<double>(p.begin(), p.end()));
      subspaces.push_back({{"type", "points"}, {"points", std::move(points)}});
    } else {
      subspaces.push_back({{"type", "continuous"}, {"dim", std::get<Continuous>(s).dim}});
    }
  }
  return {{"subspaces", std::move(subspaces)}};
}

SearchSpace load_search_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return search_space_from_json(j);
}

void save_search_space(const SearchSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << search_space_to_json(space).dump(2) << '\n';
}

}  // namespace cmasop
