#pragma once

// Product search space S_1 x ... x S_K where every S_k is either a finite set
// of points in R^{N_k} or a continuous block R^{N_k}.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace cmasop {

class PointSet {
 public:
  /// Throws ConfigError when empty, ragged, zero-dimensional, non-finite or
  /// when two points coincide.
  explicit PointSet(std::vector<Eigen::VectorXd> points);

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return dim_; }
  const Eigen::VectorXd& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }

  /// Index of the Euclidean-nearest point; ties go to the lowest index.
  std::size_t nearest_index(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::vector<Eigen::VectorXd> points_;
  std::size_t dim_ = 0;
};

struct Continuous {
  std::size_t dim = 0;
};

using Subspace = std::variant<PointSet, Continuous>;

std::size_t subspace_dim(const Subspace& s);

struct NeighborSet {
  std::size_t closest = 0;
  std::vector<std::size_t> neighbors;  // ascending
  std::size_t count() const { return neighbors.size(); }
};

/// Indices j whose Voronoi cell shares a facet with the cell of `closest`.
/// A facet counts only if some point of the bisector of the two sites is
/// strictly closer to both of them than to every other site, so cells that
/// touch in a lower-dimensional face are not neighbors.
NeighborSet voronoi_neighbors(const PointSet& set, std::size_t closest);

/// Returns the point of `subspace` nearest to x_k (x_k itself when continuous).
Eigen::VectorXd encode_subspace(const Eigen::Ref<const Eigen::VectorXd>& x_k,
                                const Subspace& subspace);

class SearchSpace {
 public:
  /// Throws ConfigError on an empty list or a zero-dimensional block.
  explicit SearchSpace(std::vector<Subspace> subspaces);

  std::size_t total_dim() const { return total_dim_; }
  std::size_t num_subspaces() const { return subspaces_.size(); }
  const Subspace& subspace(std::size_t k) const { return subspaces_.at(k); }
  const std::vector<Subspace>& subspaces() const { return subspaces_; }
  std::size_t offset(std::size_t k) const { return offsets_.at(k); }
  std::size_t block_dim(std::size_t k) const { return subspace_dim(subspaces_.at(k)); }
  bool is_point_set(std::size_t k) const {
    return std::holds_alternative<PointSet>(subspaces_.at(k));
  }
  /// Throws InvalidSubspace when block k is continuous.
  const PointSet& point_set(std::size_t k) const;

  /// Blockwise nearest-point encoding. Throws InvalidDimension on a size mismatch.
  Eigen::VectorXd encode(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Index in S_k of the point nearest to the k-th block of `mean`.
  std::size_t closest_point_to_mean(const Eigen::Ref<const Eigen::VectorXd>& mean,
                                    std::size_t k) const;

  /// voronoi_neighbors, memoized per (k, closest). Safe to call concurrently.
  const NeighborSet& neighbors(std::size_t k, std::size_t closest) const;

 private:
  std::vector<Subspace> subspaces_;
  std::vector<std::size_t> offsets_;
  std::size_t total_dim_ = 0;

  struct NeighborCache {
    std::mutex mutex;
    std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<NeighborSet>> entries;
  };
  std::shared_ptr<NeighborCache> cache_ = std::make_shared<NeighborCache>();
};

/// `{"subspaces":[{"type":"points","points":[[...],...]},{"type":"continuous","dim":n}]}`
SearchSpace search_space_from_json(const nlohmann::json& j);
nlohmann::json search_space_to_json(const SearchSpace& space);

SearchSpace load_search_space(const std::filesystem::path& path);
void save_search_space(const SearchSpace& space, const std::filesystem::path& path);

}  // namespace cmasop
