#include <numeric>

#include <benchmark/benchmark.h>

#include "specpart/eigensolve.hpp"
#include "specpart/grid.hpp"
#include "specpart/neighborhood.hpp"
#include "specpart/surface_fem.hpp"

using namespace specpart;

namespace {

struct DiskCell {
  Grid grid;
  SparseOperator laplacian;
  Eigen::VectorXd phi;
};

DiskCell disk_cell(int n, double radius) {
  Box b;
  b.dim = 2;
  Grid g = build_grid(DomainSpec::box(b), n, BoundaryMode::kDirichletBox);
  Eigen::VectorXd phi(g.size());
  for (Index x = 0; x < g.size(); ++x) {
    const Point p = g.position(x);
    phi[x] = std::hypot(p[0] - 0.3, p[1] - 0.4) < radius ? 1.0 : 0.0;
  }
  SparseOperator l = assemble_laplacian(g);
  return {std::move(g), std::move(l), std::move(phi)};
}

Neighborhood everything(Index n) {
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  return Neighborhood(std::move(all));
}

// Localized cell: restricted to R versus the whole grid.
void BM_PenalizedRestricted(benchmark::State& state) {
  const DiskCell c = disk_cell(static_cast<int>(state.range(0)), 0.15);
  const Neighborhood nb = computational_neighborhood(c.phi, adjacency(c.grid), 6);
  PenaltyOptions opt;
  opt.node_weight = c.grid.cell_volume();
  for (auto _ : state) benchmark::DoNotOptimize(penalized_eigenvalue(c.laplacian, nullptr, c.phi, 1e4, nb, opt));
  state.counters["order"] = static_cast<double>(nb.size());
}
BENCHMARK(BM_PenalizedRestricted)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_PenalizedFull(benchmark::State& state) {
  const DiskCell c = disk_cell(static_cast<int>(state.range(0)), 0.15);
  const Neighborhood nb = everything(c.grid.size());
  PenaltyOptions opt;
  opt.node_weight = c.grid.cell_volume();
  for (auto _ : state) benchmark::DoNotOptimize(penalized_eigenvalue(c.laplacian, nullptr, c.phi, 1e4, nb, opt));
  state.counters["order"] = static_cast<double>(nb.size());
}
BENCHMARK(BM_PenalizedFull)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

// Direct (sparse Cholesky) versus preconditioned CG inner solves.
void BM_Backend(benchmark::State& state) {
  const DiskCell c = disk_cell(static_cast<int>(state.range(0)), 0.3);
  EigOptions eig;
  eig.backend = state.range(1) == 0 ? EigBackend::kDirect : EigBackend::kIterative;
  PenaltyOptions opt;
  opt.node_weight = c.grid.cell_volume();
  opt.eig = eig;
  const Neighborhood nb = computational_neighborhood(c.phi, adjacency(c.grid), 6);
  for (auto _ : state) benchmark::DoNotOptimize(penalized_eigenvalue(c.laplacian, nullptr, c.phi, 1e4, nb, opt));
  state.SetLabel(state.range(1) == 0 ? "direct" : "iterative");
}
BENCHMARK(BM_Backend)->Args({128, 0})->Args({128, 1})->Args({256, 0})->Args({256, 1})->Unit(benchmark::kMillisecond);

void BM_SphereSpectrum(benchmark::State& state) {
  const FemPair fem = assemble_mass_stiffness(generate_sphere(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(smallest_eigpairs(fem.stiffness, &fem.mass, 4));
  state.counters["vertices"] = static_cast<double>(fem.mass.rows());
}
BENCHMARK(BM_SphereSpectrum)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

}  // namespace
