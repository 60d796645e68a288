#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "specpart/sparse.hpp"

namespace specpart {

/// Per-node sets of nodes within `order` adjacency hops (self excluded).
class Reachability {
 public:
  Reachability(int order, Adjacency sets) : order_(order), sets_(std::move(sets)) {}

  int order() const { return order_; }
  std::span<const Index> reachable(Index node) const { return sets_.neighbors(node); }
  bool contains(Index from, Index to) const { return sets_.adjacent(from, to); }
  Index size() const { return sets_.size(); }

 private:
  int order_;
  Adjacency sets_;
};

/// Materializes neighbors up to order p by p rounds of frontier expansion,
/// the boolean-product reading of N_f <- min(N_f + N * N_f, 1). Memory is
/// O(nodes * ball size); intended for small grids and verification.
Reachability neighbors_up_to_order(const Adjacency& adjacency, int order);

/// Multi-source breadth-first search: every node within `order` hops of some
/// seed, seeds included. Returned sorted.
std::vector<Index> hop_ball(const Adjacency& adjacency, std::span<const Index> seeds, int order);

/// Sorted node subset R with local <-> global index maps.
class Neighborhood {
 public:
  Neighborhood() = default;
  explicit Neighborhood(std::vector<Index> sorted_nodes);

  Index size() const { return static_cast<Index>(nodes_.size()); }
  bool empty() const { return nodes_.empty(); }
  std::span<const Index> nodes() const { return nodes_; }
  Index global(Index local) const { return nodes_[local]; }
  /// Local index of `global`, or -1 when the node is not in R.
  Index local(Index global) const;
  bool contains(Index global) const { return local(global) >= 0; }

  Eigen::VectorXd restrict_vector(const Eigen::Ref<const Eigen::VectorXd>& full) const;
  /// Zero-extension of a local vector to `full_size` entries.
  Eigen::VectorXd extend_vector(const Eigen::Ref<const Eigen::VectorXd>& local, Index full_size) const;

 private:
  std::vector<Index> nodes_;
};

/// Raised when a cell has no node above the support threshold.
class CellVanished : public std::runtime_error {
 public:
  explicit CellVanished(int cell = -1)
      : std::runtime_error(cell < 0 ? "cell vanished" : "cell " + std::to_string(cell) + " vanished"),
        cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

/// Union of the order-p hop balls around {density > threshold}.
/// Throws CellVanished when the support is empty.
Neighborhood computational_neighborhood(const Eigen::Ref<const Eigen::VectorXd>& density,
                                        const Adjacency& adjacency, int order, double threshold = 0.01);

/// Principal submatrix of `op` on the neighborhood, in local indexing.
SparseOperator restrict_operator(const SparseOperator& op, const Neighborhood& neighborhood);

}  // namespace specpart
