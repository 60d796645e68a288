#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "specpart/eigensolve.hpp"
#include "specpart/grid.hpp"
#include "specpart/surface_fem.hpp"

using namespace specpart;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

Grid unit_square(int n) {
  Box b;
  b.dim = 2;
  return build_grid(DomainSpec::box(b), n, BoundaryMode::kDirichletBox);
}

SparseOperator identity(Index n) {
  SparseOperator id(n, n);
  id.setIdentity();
  return id;
}

// Random sparse SPD matrix: a periodic Laplacian plus a random positive diagonal.
SparseOperator random_spd(int side, unsigned seed) {
  Box b;
  b.dim = 2;
  const Grid g = build_grid(DomainSpec::box(b), side, BoundaryMode::kPeriodic);
  SparseOperator a = assemble_laplacian(g);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 50.0);
  for (Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += u(rng);
  return a;
}

std::vector<Index> all_nodes(Index n) {
  std::vector<Index> v(n);
  for (Index i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST(SmallestEigpair, TwoByTwo) {
  SparseOperator a(2, 2);
  a.insert(0, 0) = 2.0;
  a.insert(0, 1) = -1.0;
  a.insert(1, 0) = -1.0;
  a.insert(1, 1) = 2.0;
  const EigResult r = smallest_eigpair(a);
  EXPECT_NEAR(r.eigenvalue, 1.0, 1e-12);
  EXPECT_NEAR(r.vector[0], r.vector[1], 1e-10);
  EXPECT_GT(r.vector[0], 0.0);
}

TEST(SmallestEigpair, UniformShift) {
  const Grid g = unit_square(12);
  const SparseOperator l = assemble_laplacian(g);
  const double c = 1e4;
  const SparseOperator shifted = l + c * identity(g.size());
  const double base = oracle::dense_eigenvalues(l)[0];
  EXPECT_NEAR(smallest_eigpair(shifted).eigenvalue, base + c, 1e-8 * (base + c));
}

TEST(SmallestEigpair, UnitSquareAt128) {
  const Grid g = unit_square(128);
  const EigResult r = smallest_eigpair(assemble_laplacian(g));
  EXPECT_LT(oracle::rel_err(r.eigenvalue, 2.0 * kPi2), 5e-3);
  EXPECT_NEAR(r.eigenvalue, 2.0 * oracle::fd_dirichlet_1d(128), 1e-7 * r.eigenvalue);
  EXPECT_EQ(r.order, g.size());
}

TEST(SmallestEigpair, IterativeBackendAgrees) {
  const Grid g = unit_square(60);
  const SparseOperator l = assemble_laplacian(g);
  EigOptions direct, iterative;
  direct.backend = EigBackend::kDirect;
  iterative.backend = EigBackend::kIterative;
  const double a = smallest_eigpair(l, direct).eigenvalue;
  const double b = smallest_eigpair(l, iterative).eigenvalue;
  EXPECT_NEAR(a, b, 1e-8 * a);
  EXPECT_NEAR(a, 2.0 * oracle::fd_dirichlet_1d(60), 1e-8 * a);
}

TEST(SmallestEigpairs, MatchesDenseSolver) {
  for (int side : {9, 17}) {  // dense path and subspace iteration
    const SparseOperator a = random_spd(side, 7u + side);
    const auto reference = oracle::dense_eigenvalues(a);
    for (EigBackend backend : {EigBackend::kDirect, EigBackend::kIterative}) {
      EigOptions opts;
      opts.backend = backend;
      const EigSpectrum s = smallest_eigpairs(a, nullptr, 5, opts);
      ASSERT_EQ(s.values.size(), 5);
      for (int i = 0; i < 5; ++i) EXPECT_NEAR(s.values[i], reference[i], 1e-7 * reference[i]) << side << " " << i;
    }
  }
}

TEST(SmallestEigpairs, GeneralizedMatchesDense) {
  const TriMesh mesh = generate_sphere(2);
  const FemPair fem = assemble_mass_stiffness(mesh);
  const SparseOperator a = fem.stiffness + 3.0 * fem.mass;
  const auto reference = oracle::dense_generalized_eigenvalues(a, fem.mass);
  const EigSpectrum s = smallest_eigpairs(a, &fem.mass, 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.values[i], reference[i], 1e-7 * reference[i]);
  // B-orthonormal columns.
  const Eigen::MatrixXd gram = s.vectors.transpose() * (fem.mass * s.vectors);
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(6, 6)).norm(), 1e-8);
}

TEST(SmallestEigpairs, SingularStiffnessHasZeroMode) {
  const TriMesh mesh = generate_sphere(3);
  const FemPair fem = assemble_mass_stiffness(mesh);
  const EigSpectrum s = smallest_eigpairs(fem.stiffness, &fem.mass, 4);
  EXPECT_NEAR(s.values[0], 0.0, 1e-8);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(s.values[i], 2.0, 0.04);
}

TEST(GeneralizedEigpair, IdentityMassAgreesWithStandard) {
  const Grid g = unit_square(30);
  const SparseOperator l = assemble_laplacian(g);
  const double a = smallest_eigpair(l).eigenvalue;
  const double b = smallest_eigpair_generalized(l, identity(g.size())).eigenvalue;
  EXPECT_NEAR(a, b, 1e-9 * a);
}

TEST(GeneralizedEigpair, SurfaceShiftIdentity) {
  const TriMesh mesh = generate_sphere(3);
  const FemPair fem = assemble_mass_stiffness(mesh);
  const double c = 1e4;
  const EigResult r = smallest_eigpair_generalized(fem.stiffness + c * fem.mass, fem.mass);
  EXPECT_NEAR(r.eigenvalue, c, 1e-8 * c);
  EXPECT_NEAR(r.vector.dot(fem.mass * r.vector), 1.0, 1e-10);
}

TEST(GeneralizedEigpair, IndefiniteMassRejected) {
  SparseOperator m = identity(4);
  m.coeffRef(2, 2) = -1.0;
  EXPECT_THROW(smallest_eigpair_generalized(identity(4), m), std::runtime_error);
}

TEST(SmallestEigpair, NonConvergenceCarriesBestResidual) {
  const Grid g = unit_square(200);
  EigOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-14;
  try {
    smallest_eigpair(assemble_laplacian(g), opts);
    FAIL() << "expected EigenSolveError";
  } catch (const EigenSolveError& e) {
    EXPECT_GT(e.best_residual(), 0.0);
  }
}

TEST(PenalizedEigenvalue, FullDensityGivesSquareEigenvalue) {
  const Grid g = unit_square(128);
  const Eigen::VectorXd phi = Eigen::VectorXd::Ones(g.size());
  PenaltyOptions opts;
  opts.node_weight = g.cell_volume();
  const Neighborhood nb(all_nodes(g.size()));
  const EigResult r = penalized_eigenvalue(assemble_laplacian(g), nullptr, phi, 1e4, nb, opts);
  EXPECT_LT(oracle::rel_err(r.eigenvalue, 2.0 * kPi2), 5e-3);
  EXPECT_NEAR(g.cell_volume() * r.vector.squaredNorm(), 1.0, 1e-10);
}

TEST(PenalizedEigenvalue, HalfSquare) {
  const Grid g = unit_square(127);
  Eigen::VectorXd phi(g.size());
  // Nodes sit at k / 128, so the cell edge x = 1/2 falls exactly on a node; give it 1/2.
  for (Index n = 0; n < g.size(); ++n) {
    const double x = g.position(n)[0];
    phi[n] = std::abs(x - 0.5) < 1e-12 ? 0.5 : (x < 0.5 ? 1.0 : 0.0);
  }
  PenaltyOptions opts;
  opts.node_weight = g.cell_volume();
  const SparseOperator l = assemble_laplacian(g);
  const Neighborhood all(all_nodes(g.size()));
  double previous = 1.0;
  for (double c : {1e4, 1e5, 1e6}) {
    const double lambda = penalized_eigenvalue(l, nullptr, phi, c, all, opts).eigenvalue;
    // Penalized continuum value: leakage into the penalized half lowers it below 5 pi^2.
    const double model = oracle::penalized_well_1d(0.5, c) + kPi2;
    EXPECT_LT(oracle::rel_err(lambda, model), 5e-3) << c;
    const double err = oracle::rel_err(lambda, 5.0 * kPi2);
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 0.02);
}

TEST(PenalizedEigenvalue, MaskedNodesArePenalized) {
  const Grid g = unit_square(20);
  const Eigen::VectorXd phi = Eigen::VectorXd::Ones(g.size());
  std::vector<std::uint8_t> mask(g.size(), 1);
  for (Index n = 0; n < g.size(); ++n) mask[n] = g.position(n)[0] < 0.5;
  PenaltyOptions opts;
  opts.mask = mask;
  const Neighborhood nb(all_nodes(g.size()));
  const double masked = penalized_eigenvalue(assemble_laplacian(g), nullptr, phi, 1e4, nb, opts).eigenvalue;
  const double open = penalized_eigenvalue(assemble_laplacian(g), nullptr, phi, 1e4, nb, {}).eigenvalue;
  EXPECT_GT(masked, 2.0 * open);
}

TEST(PenalizedEigenvalue, RestrictedMatchesFullGrid) {
  const Grid g = unit_square(96);
  Eigen::VectorXd phi(g.size());
  for (Index n = 0; n < g.size(); ++n) {
    const Point p = g.position(n);
    phi[n] = std::hypot(p[0] - 0.3, p[1] - 0.4) < 0.15 ? 1.0 : 0.0;
  }
  PenaltyOptions opts;
  opts.node_weight = g.cell_volume();
  const SparseOperator l = assemble_laplacian(g);
  const EigResult full = penalized_eigenvalue(l, nullptr, phi, 1e4, Neighborhood(all_nodes(g.size())), opts);
  const Neighborhood nb = computational_neighborhood(phi, adjacency(g), 6);
  const EigResult restricted = penalized_eigenvalue(l, nullptr, phi, 1e4, nb, opts);
  EXPECT_LT(restricted.order, g.size() / 4);
  EXPECT_LT(oracle::rel_err(restricted.eigenvalue, full.eigenvalue), 1e-3);
}

TEST(PenalizedEigenvalue, SurfaceLumpedPenaltyRayleighQuotient) {
  const TriMesh mesh = generate_sphere(2);
  const FemPair fem = assemble_mass_stiffness(mesh);
  Eigen::VectorXd phi(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) phi[v] = mesh.vertices(v, 2) > 0.0 ? 1.0 : 0.2;
  const Eigen::VectorXd lumped = fem.mass * Eigen::VectorXd::Ones(phi.size());
  const Eigen::VectorXd d = (Eigen::VectorXd::Ones(phi.size()) - phi).cwiseProduct(lumped);
  for (double c : {50.0, 1e4}) {
    const EigResult r = penalized_eigenvalue(fem.stiffness, &fem.mass, phi, c, Neighborhood(all_nodes(phi.size())));
    const Eigen::VectorXd u = r.vector;
    EXPECT_NEAR(u.dot(fem.mass * u), 1.0, 1e-10);
    const double rayleigh = u.dot(fem.stiffness * u) + c * u.dot(d.cwiseProduct(u));
    EXPECT_NEAR(r.eigenvalue, rayleigh, 1e-8 * r.eigenvalue) << c;
    SparseOperator a = fem.stiffness;
    for (Index v = 0; v < a.rows(); ++v) a.coeffRef(v, v) += c * d[v];
    const Eigen::VectorXd dense = oracle::dense_generalized_eigenvalues(a, fem.mass);
    EXPECT_NEAR(r.eigenvalue, dense[0], 1e-7 * dense[0]) << c;
    EXPECT_GT(dense[0], 0.0);
  }
}
