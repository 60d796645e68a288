#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "specpart/grid.hpp"
#include "specpart/sparse.hpp"
#include "specpart/surface_fem.hpp"

namespace specpart {

enum class DiscretizationKind { kGrid, kSurface };

/// Everything the optimizer needs to know about where densities live: the
/// base operator (Laplacian or stiffness), the optional mass matrix, nodal
/// quadrature weights, node adjacency and the in-domain mask.
struct Discretization {
  DiscretizationKind kind = DiscretizationKind::kGrid;
  std::optional<Grid> grid;
  std::optional<TriMesh> mesh;
  SparseOperator stiffness;
  std::optional<SparseOperator> mass;
  /// h^dim on grids, lumped (row-sum) mass on surfaces.
  Eigen::VectorXd weights;
  Adjacency adjacency;
  std::vector<std::uint8_t> mask;
  /// Neighborhood padding: p on grids, edge hops on surfaces.
  int default_order = 6;

  Index size() const { return static_cast<Index>(mask.size()); }
  bool in_domain(Index node) const { return mask[node] != 0; }
  /// Total in-domain measure (area or volume).
  double measure() const;
  const SparseOperator* mass_ptr() const { return mass ? &*mass : nullptr; }
};

Discretization make_grid_discretization(Grid grid, int order = 6);
Discretization make_surface_discretization(TriMesh mesh, int hops = 5);

}  // namespace specpart
