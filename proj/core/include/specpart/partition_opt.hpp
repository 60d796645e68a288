#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specpart/discretization.hpp"
#include "specpart/eigensolve.hpp"

namespace specpart {

enum class ConstraintMode {
  kPartition,   ///< sum_i phi_i == 1
  kMultiphase,  ///< sum_i phi_i + phi_void == 1
};

const char* to_string(ConstraintMode mode);
ConstraintMode constraint_mode_from_string(const std::string& name);

/// n density functions on the nodes of a discretization, one column per cell.
struct DensitySet {
  ConstraintMode mode = ConstraintMode::kPartition;
  Eigen::MatrixXd cells;
  /// Empty unless mode == kMultiphase.
  Eigen::VectorXd void_phase;
  /// Nodes where every phase vanished during the last projection.
  Index degenerate_nodes = 0;

  int count() const { return static_cast<int>(cells.cols()); }
  Index nodes() const { return cells.rows(); }
};

/// i.i.d. uniform(0, 1) values, zero outside the domain, then projected.
/// Deterministic for a fixed seed.
DensitySet random_init(int n, const Discretization& disc, std::uint64_t seed,
                       ConstraintMode mode = ConstraintMode::kPartition);

/// phi_i <- |phi_i| / sum_j |phi_j| on in-domain nodes (the void phase joins
/// the sum in multiphase mode); masked-out nodes are zeroed. Nodes where all
/// phases vanish get 1/(number of phases) and are counted in
/// degenerate_nodes.
DensitySet project_to_partition(DensitySet densities, std::span<const std::uint8_t> mask = {});

/// max over in-domain nodes of |sum of phases - 1|.
double partition_defect(const DensitySet& densities, std::span<const std::uint8_t> mask = {});

enum class VanishPolicy { kAbort, kReinitialize };

struct OptimizerOptions {
  double penalty = 1e4;
  /// Neighborhood padding; 0 uses the discretization default.
  int order = 0;
  double threshold = 0.01;
  /// Initial step; 0 selects 1 / penalty.
  double initial_step = 0.0;
  double min_step = 1e-6;
  int max_iter = 500;
  /// Area weight in multiphase mode.
  double area_penalty = 0.0;
  VanishPolicy on_vanish = VanishPolicy::kAbort;
  /// Worker threads for the per-cell eigenproblems; 0 = hardware concurrency.
  int threads = 0;
  EigOptions eig{};
};

/// Energy, per-cell eigenpairs and gradient densities of a DensitySet.
///
/// gradients(:, i) is the L2 gradient density of the cell's energy term: the
/// directional derivative along a perturbation d is sum_x w_x g(x) d(x).
struct Evaluation {
  double energy = 0.0;
  std::vector<double> eigenvalues;
  std::vector<double> areas;
  std::vector<Index> problem_sizes;
  Eigen::MatrixXd eigenvectors;
  Eigen::MatrixXd gradients;
};

/// Called once per eigenproblem solved: (cell, restricted size).
using SolveObserver = std::function<void(int, Index)>;

/// Per cell: computational neighborhood, restricted penalized eigenproblem,
/// gradient density -C u^2, zero outside R.
/// Throws CellVanished carrying the cell index.
Evaluation energy_and_gradients(const DensitySet& densities, const Discretization& disc,
                                const OptimizerOptions& options, const SolveObserver& observer = {});

/// phi_i <- phi_i - step * g_i, then projection. In multiphase mode g_i
/// includes the area term and negative values are clipped to zero before
/// projecting.
DensitySet descent_step(const DensitySet& densities, const Evaluation& evaluation, double step,
                        const Discretization& disc, const OptimizerOptions& options);

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double step = 0.0;
  bool accepted = false;
  Index min_size = 0;
  Index max_size = 0;
  double mean_size = 0.0;
  double seconds = 0.0;
};

enum class StopReason { kStepTooSmall, kMaxIterations, kInterrupted };
const char* to_string(StopReason reason);

struct OptState {
  DensitySet densities;
  Evaluation evaluation;
  double step = 0.0;
  int iteration = 0;
};

struct OptimizeHooks {
  SolveObserver on_solve;
  /// Called after every iteration (accepted or not); returning false stops
  /// the run with StopReason::kInterrupted.
  std::function<bool(const OptState&, const IterationRecord&)> on_iteration;
  /// Resume support: starting step (0 = options) and iteration counter.
  double start_step = 0.0;
  int start_iteration = 0;
};

struct OptResult {
  OptState state;
  std::vector<IterationRecord> history;
  StopReason reason = StopReason::kMaxIterations;
  int vanish_events = 0;
};

/// Projected gradient descent with step halving: a candidate is accepted
/// only on strict energy decrease; otherwise the step is halved and the
/// previous state kept. Stops when the step drops below min_step or after
/// max_iter iterations.
OptResult optimize(const Discretization& disc, DensitySet initial, const OptimizerOptions& options,
                   const OptimizeHooks& hooks = {});

/// Multilinear interpolation onto a finer grid of the same domain, then
/// projection onto `fine`'s domain. Positions outside the coarse lattice are
/// clamped (Dirichlet) or wrapped (periodic; the period cells must agree).
DensitySet refine(const DensitySet& densities, const Grid& coarse, const Grid& fine);

struct ContinuationLevel {
  int resolution = 0;
  OptResult result;
  double seconds = 0.0;
};

/// Random start at schedule.front(), optimize, refine, repeat.
std::vector<ContinuationLevel> optimize_with_continuation(const DomainSpec& domain, BoundaryMode mode, int n,
                                                          std::span<const int> schedule, std::uint64_t seed,
                                                          const OptimizerOptions& options,
                                                          ConstraintMode constraint = ConstraintMode::kPartition);

/// Multiphase run minimizing sum lambda_1 + area_penalty * sum |omega_i|.
OptResult circle_packing_mode(const Discretization& disc, int n, std::uint64_t seed, const OptimizerOptions& options);

/// sqrt(area / pi) per cell (2D).
std::vector<double> equivalent_radii(const Evaluation& evaluation);

/// Radius of the disk minimizing lambda_1 + alpha |omega|: (j01^2 / (alpha pi))^(1/4).
double optimal_disk_radius(double area_penalty);

/// Cell areas sum_x w_x phi_i(x).
std::vector<double> cell_areas(const DensitySet& densities, const Discretization& disc);

}  // namespace specpart
