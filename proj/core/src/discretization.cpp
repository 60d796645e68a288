#include "specpart/discretization.hpp"

namespace specpart {

double Discretization::measure() const {
  double total = 0.0;
  for (Index i = 0; i < size(); ++i) {
    if (in_domain(i)) total += weights[i];
  }
  return total;
}

Discretization make_grid_discretization(Grid grid, int order) {
  Discretization d;
  d.kind = DiscretizationKind::kGrid;
  d.stiffness = assemble_laplacian(grid);
  d.adjacency = Adjacency::from_operator(d.stiffness);
  d.weights = Eigen::VectorXd::Constant(grid.size(), grid.cell_volume());
  d.mask = grid.mask();
  d.default_order = order;
  d.grid = std::move(grid);
  return d;
}

Discretization make_surface_discretization(TriMesh mesh, int hops) {
  validate_mesh(mesh);
  Discretization d;
  d.kind = DiscretizationKind::kSurface;
  FemPair fem = assemble_mass_stiffness(mesh);
  d.stiffness = std::move(fem.stiffness);
  d.weights = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (Index j = 0; j < fem.mass.outerSize(); ++j) {
    for (SparseOperator::InnerIterator it(fem.mass, j); it; ++it) d.weights[it.row()] += it.value();
  }
  d.mass = std::move(fem.mass);
  d.adjacency = mesh_adjacency(mesh);
  d.mask.assign(mesh.vertex_count(), 1);
  d.default_order = hops;
  d.mesh = std::move(mesh);
  return d;
}

}  // namespace specpart
