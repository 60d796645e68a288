#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Sparse>

namespace specpart {

using Index = std::int64_t;

/// Symmetric sparse matrix (Laplacian, stiffness, mass and their principal
/// submatrices). Column-major with 32-bit storage indices.
using SparseOperator = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Order-1 neighbor lists in compressed-row form. The relation is symmetric
/// and has no self-loops.
class Adjacency {
 public:
  Adjacency() = default;
  Adjacency(std::vector<Index> offsets, std::vector<Index> targets);

  /// Nodes i != j are adjacent iff op(i, j) != 0.
  static Adjacency from_operator(const SparseOperator& op);

  /// Builds the symmetric closure of an undirected edge list.
  static Adjacency from_edges(Index node_count, std::span<const std::pair<Index, Index>> edges);

  Index size() const { return offsets_.empty() ? 0 : static_cast<Index>(offsets_.size()) - 1; }
  Index degree(Index node) const { return offsets_[node + 1] - offsets_[node]; }
  std::span<const Index> neighbors(Index node) const {
    return {targets_.data() + offsets_[node], static_cast<size_t>(degree(node))};
  }
  bool adjacent(Index a, Index b) const;
  Index edge_count() const { return static_cast<Index>(targets_.size()) / 2; }

 private:
  std::vector<Index> offsets_;
  std::vector<Index> targets_;  // sorted within each row
};

/// Writes `op` as MatrixMarket "coordinate real general" text.
void write_matrix_market(std::ostream& out, const SparseOperator& op);

/// Relative symmetry defect max|A - A^T| / max|A|.
double symmetry_defect(const SparseOperator& op);

}  // namespace specpart
