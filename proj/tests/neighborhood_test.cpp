#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "specpart/grid.hpp"
#include "specpart/neighborhood.hpp"

using namespace specpart;

namespace {

Grid square(int n, BoundaryMode mode = BoundaryMode::kDirichletBox) {
  Box b;
  b.dim = 2;
  return build_grid(DomainSpec::box(b), n, mode);
}

}  // namespace

TEST(Reachability, OrderOneIsAdjacency) {
  const Grid g = square(7);
  const Adjacency adj = adjacency(g);
  const Reachability r = neighbors_up_to_order(adj, 1);
  for (Index n = 0; n < g.size(); ++n) {
    const auto a = adj.neighbors(n);
    const auto b = r.reachable(n);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
}

TEST(Reachability, InteriorL1BallOrderFour) {
  const Grid g = square(15);
  const Reachability r = neighbors_up_to_order(adjacency(g), 4);
  EXPECT_EQ(oracle::l1_ball_count_2d(4), 40);
  EXPECT_EQ(static_cast<int>(r.reachable(g.index({7, 7, 0})).size()), 40);
}

TEST(Reachability, MonotoneInOrder) {
  const Grid g = square(9, BoundaryMode::kPeriodic);
  const Adjacency adj = adjacency(g);
  const Reachability r2 = neighbors_up_to_order(adj, 2);
  const Reachability r3 = neighbors_up_to_order(adj, 3);
  for (Index n = 0; n < g.size(); ++n) {
    for (Index m : r2.reachable(n)) EXPECT_TRUE(r3.contains(n, m));
  }
}

TEST(Reachability, MatchesBreadthFirstDistances) {
  Box b;
  b.dim = 2;
  const Grid g = build_grid(DomainSpec::ball(2, {0.5, 0.5, 0.0}, 0.5), 12, BoundaryMode::kDirichletBox);
  const Adjacency adj = adjacency(g);
  const int p = 3;
  const Reachability r = neighbors_up_to_order(adj, p);
  for (Index n = 0; n < g.size(); n += 5) {
    const auto dist = oracle::bfs_distances(adj, n);
    for (Index m = 0; m < g.size(); ++m) {
      const bool expected = m != n && dist[m] >= 0 && dist[m] <= p;
      EXPECT_EQ(r.contains(n, m), expected) << n << " -> " << m;
    }
  }
}

TEST(HopBall, EqualsUnionOfReachabilitySets) {
  const Grid g = square(16, BoundaryMode::kPeriodic);
  const Adjacency adj = adjacency(g);
  const int p = 4;
  const Reachability r = neighbors_up_to_order(adj, p);
  std::mt19937 rng(3);
  std::uniform_int_distribution<Index> pick(0, g.size() - 1);
  std::vector<Index> seeds{pick(rng), pick(rng), pick(rng)};
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::vector<Index> expected(seeds);
  for (Index s : seeds) expected.insert(expected.end(), r.reachable(s).begin(), r.reachable(s).end());
  std::sort(expected.begin(), expected.end());
  expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
  EXPECT_EQ(hop_ball(adj, seeds, p), expected);
}

TEST(ComputationalNeighborhood, FullSupportGivesAllNodes) {
  const Grid g = square(10);
  const auto nb = computational_neighborhood(Eigen::VectorXd::Ones(g.size()), adjacency(g), 6);
  EXPECT_EQ(nb.size(), g.size());
}

TEST(ComputationalNeighborhood, SingleNodeOrderFive) {
  const Grid g = square(21);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(g.size());
  phi[g.index({10, 10, 0})] = 1.0;
  const auto nb = computational_neighborhood(phi, adjacency(g), 5);
  EXPECT_EQ(nb.size(), 1 + oracle::l1_ball_count_2d(5));
  EXPECT_EQ(nb.size(), 61);
}

TEST(ComputationalNeighborhood, ThresholdIsStrict) {
  const Grid g = square(8);
  Eigen::VectorXd phi = Eigen::VectorXd::Constant(g.size(), 0.01);
  EXPECT_THROW(computational_neighborhood(phi, adjacency(g), 3), CellVanished);
  phi[0] = 0.0100001;
  EXPECT_EQ(computational_neighborhood(phi, adjacency(g), 1).size(), 3);
}

TEST(Neighborhood, LocalGlobalMaps) {
  const Neighborhood nb({2, 5, 9});
  EXPECT_EQ(nb.local(5), 1);
  EXPECT_EQ(nb.local(4), -1);
  EXPECT_EQ(nb.global(2), 9);
  Eigen::VectorXd full = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
  const Eigen::VectorXd local = nb.restrict_vector(full);
  EXPECT_EQ(local, Eigen::Vector3d(2, 5, 9));
  const Eigen::VectorXd back = nb.extend_vector(local, 10);
  EXPECT_EQ(back[5], 5.0);
  EXPECT_EQ(back[4], 0.0);
}

TEST(RestrictOperator, AllNodesIsIdentityMap) {
  const Grid g = square(6);
  const SparseOperator l = assemble_laplacian(g);
  std::vector<Index> all(g.size());
  std::iota(all.begin(), all.end(), 0);
  const SparseOperator r = restrict_operator(l, Neighborhood(all));
  EXPECT_EQ((Eigen::MatrixXd(r) - Eigen::MatrixXd(l)).norm(), 0.0);
}

TEST(RestrictOperator, SingleInteriorNode) {
  const Grid g = square(6);
  const SparseOperator r = restrict_operator(assemble_laplacian(g), Neighborhood({g.index({2, 3, 0})}));
  ASSERT_EQ(r.rows(), 1);
  EXPECT_DOUBLE_EQ(r.coeff(0, 0), 4.0 / (g.spacing() * g.spacing()));
}

TEST(RestrictOperator, PrincipalSubmatrixIsSymmetric) {
  const Grid g = square(9, BoundaryMode::kPeriodic);
  const SparseOperator l = assemble_laplacian(g);
  const Neighborhood nb(hop_ball(adjacency(g), std::vector<Index>{0, 40}, 2));
  const SparseOperator r = restrict_operator(l, nb);
  EXPECT_EQ(symmetry_defect(r), 0.0);
  for (Index i = 0; i < nb.size(); ++i) {
    for (Index j = 0; j < nb.size(); ++j) EXPECT_EQ(r.coeff(i, j), l.coeff(nb.global(i), nb.global(j)));
  }
}

TEST(RestrictOperator, OutOfRangeRejected) {
  const Grid g = square(4);
  EXPECT_THROW(restrict_operator(assemble_laplacian(g), Neighborhood({3, 99})), std::out_of_range);
}
