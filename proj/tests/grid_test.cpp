#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "specpart/grid.hpp"

using namespace specpart;

namespace {

DomainSpec unit_box(int dim) {
  Box b;
  b.dim = dim;
  return DomainSpec::box(b);
}

}  // namespace

TEST(Grid, UnitSquareFourByFourDirichlet) {
  const Grid g = build_grid(unit_box(2), 4, BoundaryMode::kDirichletBox);
  EXPECT_EQ(g.size(), 16);
  EXPECT_EQ(g.in_domain_count(), 16);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.2);
  EXPECT_DOUBLE_EQ(g.position(Index{0})[0], 0.2);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 0.04);
}

TEST(Grid, LexicographicOrderXFastest) {
  const Grid g = build_grid(unit_box(3), 5, BoundaryMode::kDirichletBox);
  EXPECT_EQ(g.index({1, 0, 0}), 1);
  EXPECT_EQ(g.index({0, 1, 0}), 5);
  EXPECT_EQ(g.index({0, 0, 1}), 25);
  for (Index n = 0; n < g.size(); n += 7) EXPECT_EQ(g.index(g.multi_index(n)), n);
}

TEST(Grid, DiskMaskFraction) {
  const Grid g = build_grid(DomainSpec::ball(2, {0.5, 0.5, 0.0}, 0.5), 64, BoundaryMode::kDirichletBox);
  const double fraction = double(g.in_domain_count()) / double(g.size());
  EXPECT_NEAR(fraction, std::numbers::pi / 4.0, 0.05);
}

TEST(Grid, EmptyMaskIsAnError) {
  Box b;
  b.dim = 2;
  const auto nowhere = DomainSpec::implicit(b, [](const Point&) { return false; });
  try {
    build_grid(nowhere, 8, BoundaryMode::kDirichletBox);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "domain does not intersect grid");
  }
}

TEST(Grid, TooFewNodesRejected) {
  EXPECT_THROW(build_grid(unit_box(2), 2, BoundaryMode::kDirichletBox), std::invalid_argument);
}

TEST(Grid, PeriodicEveryNodeHasFourNeighbors) {
  const Grid g = build_grid(unit_box(2), 8, BoundaryMode::kPeriodic);
  const Adjacency adj = adjacency(g);
  for (Index n = 0; n < g.size(); ++n) EXPECT_EQ(adj.degree(n), 4);
}

TEST(Grid, PeriodicThreeDimensionalDegreeSix) {
  const Grid g = build_grid(unit_box(3), 6, BoundaryMode::kPeriodic);
  const Adjacency adj = adjacency(g);
  for (Index n = 0; n < g.size(); ++n) EXPECT_EQ(adj.degree(n), 6);
}

TEST(Grid, DirichletDegrees) {
  const Grid g = build_grid(unit_box(2), 8, BoundaryMode::kDirichletBox);
  const Adjacency adj = adjacency(g);
  EXPECT_EQ(adj.degree(g.index({3, 4, 0})), 4);
  EXPECT_EQ(adj.degree(g.index({0, 0, 0})), 2);
  EXPECT_EQ(adj.degree(g.index({0, 3, 0})), 3);
  const Grid p = build_grid(unit_box(2), 8, BoundaryMode::kPeriodic);
  EXPECT_EQ(adjacency(p).degree(p.index({0, 0, 0})), 4);
}

TEST(Laplacian, TridiagonalClosedForm) {
  // 3 x 3 interior nodes, h = 1/4: the 2D minimum is twice the 1D one.
  const double one_d = oracle::fd_dirichlet_1d(3);
  EXPECT_NEAR(one_d, 9.3726, 1e-4);
  const Grid g = build_grid(unit_box(2), 3, BoundaryMode::kDirichletBox);
  ASSERT_DOUBLE_EQ(g.spacing(), 0.25);
  const auto ev = oracle::dense_eigenvalues(assemble_laplacian(g));
  EXPECT_NEAR(ev[0], 2.0 * one_d, 1e-10);
}

TEST(Laplacian, StencilEntries) {
  const Grid g = build_grid(unit_box(2), 4, BoundaryMode::kDirichletBox);
  const SparseOperator l = assemble_laplacian(g);
  const double h2 = g.spacing() * g.spacing();
  EXPECT_DOUBLE_EQ(l.coeff(5, 5), 4.0 / h2);
  EXPECT_DOUBLE_EQ(l.coeff(5, 6), -1.0 / h2);
  EXPECT_DOUBLE_EQ(l.coeff(5, 9), -1.0 / h2);
  EXPECT_DOUBLE_EQ(l.coeff(5, 10), 0.0);
  EXPECT_EQ(symmetry_defect(l), 0.0);
}

TEST(Laplacian, PeriodicConstantsInKernel) {
  const Grid g = build_grid(unit_box(3), 5, BoundaryMode::kPeriodic);
  const Eigen::VectorXd r = assemble_laplacian(g) * Eigen::VectorXd::Ones(g.size());
  EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Laplacian, SmallestEigenvalueApproachesTwoPiSquared) {
  const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
  double previous = 1.0;
  for (int n : {8, 16, 24}) {
    const Grid g = build_grid(unit_box(2), n, BoundaryMode::kDirichletBox);
    const double lambda = oracle::dense_eigenvalues(assemble_laplacian(g))[0];
    EXPECT_NEAR(lambda, 2.0 * oracle::fd_dirichlet_1d(n), 1e-8 * lambda);
    const double err = oracle::rel_err(lambda, exact);
    EXPECT_LT(err, previous);
    previous = err;
  }
}

TEST(Laplacian, MatrixMarketHeader) {
  const Grid g = build_grid(unit_box(2), 3, BoundaryMode::kDirichletBox);
  std::ostringstream out;
  write_matrix_market(out, assemble_laplacian(g));
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("%%MatrixMarket matrix coordinate real general", 0), 0u);
  EXPECT_NE(text.find("9 9 33"), std::string::npos);
}

TEST(Grid, BoundaryModeNames) {
  EXPECT_EQ(boundary_mode_from_string("periodic"), BoundaryMode::kPeriodic);
  EXPECT_EQ(boundary_mode_from_string("dirichlet"), BoundaryMode::kDirichletBox);
  EXPECT_THROW(boundary_mode_from_string("neumann"), std::invalid_argument);
}

TEST(Domain, ShapesContainTheirCenters) {
  EXPECT_TRUE(DomainSpec::equilateral_triangle(1.0).contains({0.5, 0.2, 0.0}));
  EXPECT_FALSE(DomainSpec::equilateral_triangle(1.0).contains({0.05, 0.8, 0.0}));
  EXPECT_TRUE(DomainSpec::regular_tetrahedron(1.0).contains(
      {0.5, std::sqrt(3.0) / 6.0, std::sqrt(6.0) / 12.0}));
  const auto l_shape = DomainSpec::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  EXPECT_TRUE(l_shape.contains({0.5, 1.5, 0.0}));
  EXPECT_FALSE(l_shape.contains({1.5, 1.5, 0.0}));
  EXPECT_TRUE(DomainSpec::ellipse({0, 0, 0}, 2.0, 1.0).contains({1.9, 0.0, 0.0}));
}
