#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "specpart/eigensolve.hpp"
#include "specpart/sparse.hpp"
#include "specpart/surface_fem.hpp"

namespace specpart {

/// Cells i and j are adjacent when some node with phi_i > level is an
/// order-1 neighbor of some node with phi_j > level.
struct CellAdjacencyGraph {
  int cells = 0;
  /// Sorted pairs (i, j), i < j.
  std::vector<std::pair<int, int>> edges;
  std::vector<int> neighbor_counts;
  /// Cells with no node above the level; they have no edges.
  std::vector<int> empty_cells;

  bool adjacent(int i, int j) const;
};

/// `densities` has one column per cell.
CellAdjacencyGraph count_cell_neighbors(const Eigen::Ref<const Eigen::MatrixXd>& densities,
                                        const Adjacency& adjacency, double level = 0.5);

struct SpectralSignature {
  /// k smallest eigenvalues of (K, M), ascending.
  std::vector<double> eigenvalues;
  /// eigenvalues / ||eigenvalues||.
  Eigen::VectorXd vector;
};

/// Requires a closed mesh and k >= 2.
SpectralSignature spectral_signature(const TriMesh& mesh, int k = 10, const EigOptions& options = {});

double signature_distance(const SpectralSignature& a, const SpectralSignature& b);

struct ClassPartition {
  /// Class of each cell; classes are numbered in order of their lowest cell.
  std::vector<int> assignment;
  Eigen::MatrixXd distances;

  int class_count() const;
  /// Sizes in class order.
  std::vector<int> class_sizes() const;
};

/// Classes are the connected components of the graph {distance < epsilon}.
ClassPartition classify_cells(std::span<const SpectralSignature> signatures, double epsilon = 0.01);

/// lambda_1 * vol^(2/3); throws std::invalid_argument unless both are positive.
double scale_invariant_eigenvalue(double lambda1, double volume);

/// argmax_i phi_i per node, lowest index on ties; -1 on masked-out nodes.
std::vector<int> argmax_labels(const Eigen::Ref<const Eigen::MatrixXd>& densities,
                               std::span<const std::uint8_t> mask = {});

}  // namespace specpart
