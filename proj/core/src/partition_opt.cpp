#include "specpart/partition_opt.hpp"
#include "specpart/neighborhood.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace specpart {
namespace {

using Clock = std::chrono::steady_clock;

bool masked_in(std::span<const std::uint8_t> mask, Index node) { return mask.empty() || mask[node] != 0; }

// Runs fn(i) for i in [0, count); rethrows the exception of the lowest index.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    pool.clear();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int effective_order(const Discretization& disc, const OptimizerOptions& options) {
  return options.order > 0 ? options.order : disc.default_order;
}

// Replaces a vanished cell by the mass the other cells leave uncovered, plus
// a small seed ball around the least covered node so the cell is visible even
// when the others saturate the domain.
void reinitialize_cell(DensitySet& densities, int cell, const Discretization& disc) {
  Eigen::VectorXd cover = Eigen::VectorXd::Constant(densities.nodes(), std::numeric_limits<double>::infinity());
  for (Index x = 0; x < densities.nodes(); ++x) {
    if (!disc.in_domain(x)) continue;
    cover[x] = 0.0;
    for (int j = 0; j < densities.count(); ++j) {
      if (j != cell) cover[x] = std::max(cover[x], densities.cells(x, j));
    }
    densities.cells(x, cell) = std::max(0.0, 1.0 - cover[x]);
  }
  Index seed = 0;
  cover.minCoeff(&seed);
  const std::vector<Index> ball = hop_ball(disc.adjacency, std::span<const Index>(&seed, 1), 3);
  for (Index x : ball) {
    if (disc.in_domain(x)) densities.cells(x, cell) = std::max(densities.cells(x, cell), 1.0);
  }
  densities = project_to_partition(std::move(densities), disc.mask);
}

}  // namespace

const char* to_string(ConstraintMode mode) {
  return mode == ConstraintMode::kMultiphase ? "multiphase" : "partition";
}

ConstraintMode constraint_mode_from_string(const std::string& name) {
  if (name == "partition") return ConstraintMode::kPartition;
  if (name == "multiphase") return ConstraintMode::kMultiphase;
  throw std::invalid_argument("unknown constraint mode '" + name + "'");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kStepTooSmall: return "step_below_minimum";
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kInterrupted: return "interrupted";
  }
  return "unknown";
}

DensitySet random_init(int n, const Discretization& disc, std::uint64_t seed, ConstraintMode mode) {
  if (n < 1) throw std::invalid_argument("cell count must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  DensitySet out;
  out.mode = mode;
  out.cells.resize(disc.size(), n);
  for (int i = 0; i < n; ++i) {
    for (Index x = 0; x < disc.size(); ++x) {
      const double value = uniform(rng);
      out.cells(x, i) = disc.in_domain(x) ? value : 0.0;
    }
  }
  if (mode == ConstraintMode::kMultiphase) {
    out.void_phase.resize(disc.size());
    for (Index x = 0; x < disc.size(); ++x) {
      const double value = uniform(rng);
      out.void_phase[x] = disc.in_domain(x) ? value : 0.0;
    }
  }
  return project_to_partition(std::move(out), disc.mask);
}

DensitySet project_to_partition(DensitySet d, std::span<const std::uint8_t> mask) {
  const bool multiphase = d.mode == ConstraintMode::kMultiphase;
  if (multiphase && d.void_phase.size() != d.nodes()) {
    throw std::invalid_argument("multiphase densities need a void phase");
  }
  if (!mask.empty() && static_cast<Index>(mask.size()) != d.nodes()) {
    throw std::invalid_argument("mask size does not match densities");
  }
  const int phases = d.count() + (multiphase ? 1 : 0);
  d.degenerate_nodes = 0;
  for (Index x = 0; x < d.nodes(); ++x) {
    if (!masked_in(mask, x)) {
      d.cells.row(x).setZero();
      if (multiphase) d.void_phase[x] = 0.0;
      continue;
    }
    d.cells.row(x) = d.cells.row(x).cwiseAbs();
    double sum = d.cells.row(x).sum();
    if (multiphase) {
      d.void_phase[x] = std::abs(d.void_phase[x]);
      sum += d.void_phase[x];
    }
    if (sum > 0.0) {
      d.cells.row(x) /= sum;
      if (multiphase) d.void_phase[x] /= sum;
    } else {
      ++d.degenerate_nodes;
      d.cells.row(x).setConstant(1.0 / phases);
      if (multiphase) d.void_phase[x] = 1.0 / phases;
    }
  }
  return d;
}

double partition_defect(const DensitySet& d, std::span<const std::uint8_t> mask) {
  double defect = 0.0;
  for (Index x = 0; x < d.nodes(); ++x) {
    if (!masked_in(mask, x)) continue;
    double sum = d.cells.row(x).sum();
    if (d.mode == ConstraintMode::kMultiphase) sum += d.void_phase[x];
    defect = std::max(defect, std::abs(sum - 1.0));
  }
  return defect;
}

std::vector<double> cell_areas(const DensitySet& densities, const Discretization& disc) {
  std::vector<double> areas(densities.count(), 0.0);
  for (int i = 0; i < densities.count(); ++i) {
    for (Index x = 0; x < densities.nodes(); ++x) {
      if (disc.in_domain(x)) areas[i] += disc.weights[x] * densities.cells(x, i);
    }
  }
  return areas;
}

Evaluation energy_and_gradients(const DensitySet& densities, const Discretization& disc,
                                const OptimizerOptions& options, const SolveObserver& observer) {
  const int n = densities.count();
  if (densities.nodes() != disc.size()) throw std::invalid_argument("densities do not match discretization");
  const int order = effective_order(disc, options);
  const double c = options.penalty;

  PenaltyOptions popt;
  popt.node_weight = disc.kind == DiscretizationKind::kGrid ? disc.weights[0] : 1.0;
  popt.mask = disc.mask;
  popt.eig = options.eig;

  Evaluation ev;
  ev.eigenvalues.assign(n, 0.0);
  ev.problem_sizes.assign(n, 0);
  ev.eigenvectors.resize(disc.size(), n);
  ev.gradients.resize(disc.size(), n);

  parallel_for(n, options.threads, [&](int i) {
    const auto phi = densities.cells.col(i);
    Neighborhood nb;
    try {
      nb = computational_neighborhood(phi, disc.adjacency, order, options.threshold);
    } catch (const CellVanished&) {
      throw CellVanished(i);
    }
    EigResult r = penalized_eigenvalue(disc.stiffness, disc.mass_ptr(), phi, c, nb, popt);
    ev.eigenvalues[i] = r.eigenvalue;
    ev.problem_sizes[i] = r.order;
    Eigen::VectorXd grad = -c * r.vector.cwiseAbs2();
    for (Index x = 0; x < disc.size(); ++x) {
      if (!disc.in_domain(x)) grad[x] = 0.0;
    }
    ev.eigenvectors.col(i) = std::move(r.vector);
    ev.gradients.col(i) = std::move(grad);
  });
  if (observer) {
    for (int i = 0; i < n; ++i) observer(i, ev.problem_sizes[i]);
  }

  ev.areas = cell_areas(densities, disc);
  ev.energy = 0.0;
  for (double lambda : ev.eigenvalues) ev.energy += lambda;
  if (densities.mode == ConstraintMode::kMultiphase && options.area_penalty != 0.0) {
    for (double a : ev.areas) ev.energy += options.area_penalty * a;
    for (Index x = 0; x < disc.size(); ++x) {
      if (disc.in_domain(x)) ev.gradients.row(x).array() += options.area_penalty;
    }
  }
  return ev;
}

DensitySet descent_step(const DensitySet& densities, const Evaluation& evaluation, double step,
                        const Discretization& disc, const OptimizerOptions& options) {
  DensitySet out = densities;
  const bool multiphase = densities.mode == ConstraintMode::kMultiphase;
  for (Index x = 0; x < out.nodes(); ++x) {
    if (!disc.in_domain(x)) continue;
    for (int i = 0; i < out.count(); ++i) {
      double& v = out.cells(x, i);
      v -= step * evaluation.gradients(x, i);
      // the area pull must empty a node, not reflect through |.|
      if (multiphase && v < 0.0) v = 0.0;
    }
  }
  return project_to_partition(std::move(out), disc.mask);
}

OptResult optimize(const Discretization& disc, DensitySet initial, const OptimizerOptions& options,
                   const OptimizeHooks& hooks) {
  if (!(options.penalty > 0.0)) throw std::invalid_argument("penalty must be positive");
  if (initial.nodes() != disc.size()) throw std::invalid_argument("densities do not match discretization");
  if (initial.mode == ConstraintMode::kMultiphase && !(options.area_penalty >= 0.0)) {
    throw std::invalid_argument("area penalty must be non-negative");
  }

  OptResult result;
  auto evaluate = [&](DensitySet& d) {
    for (int attempt = 0;; ++attempt) {
      try {
        return energy_and_gradients(d, disc, options, hooks.on_solve);
      } catch (const CellVanished& e) {
        if (options.on_vanish == VanishPolicy::kAbort || attempt >= d.count() || e.cell() < 0) throw;
        ++result.vanish_events;
        reinitialize_cell(d, e.cell(), disc);
      }
    }
  };

  OptState& state = result.state;
  state.densities = std::move(initial);
  state.evaluation = evaluate(state.densities);
  state.step = hooks.start_step > 0.0 ? hooks.start_step
                                      : (options.initial_step > 0.0 ? options.initial_step : 1.0 / options.penalty);
  state.iteration = hooks.start_iteration;

  while (true) {
    if (state.step < options.min_step) {
      result.reason = StopReason::kStepTooSmall;
      break;
    }
    if (state.iteration >= options.max_iter) {
      result.reason = StopReason::kMaxIterations;
      break;
    }
    const auto t0 = Clock::now();
    DensitySet candidate = descent_step(state.densities, state.evaluation, state.step, disc, options);
    Evaluation cand_eval = evaluate(candidate);

    IterationRecord rec;
    rec.iteration = ++state.iteration;
    rec.step = state.step;
    rec.accepted = cand_eval.energy < state.evaluation.energy;
    rec.min_size = *std::min_element(cand_eval.problem_sizes.begin(), cand_eval.problem_sizes.end());
    rec.max_size = *std::max_element(cand_eval.problem_sizes.begin(), cand_eval.problem_sizes.end());
    double total = 0.0;
    for (Index s : cand_eval.problem_sizes) total += static_cast<double>(s);
    rec.mean_size = total / static_cast<double>(cand_eval.problem_sizes.size());
    if (rec.accepted) {
      state.densities = std::move(candidate);
      state.evaluation = std::move(cand_eval);
    } else {
      state.step *= 0.5;
    }
    rec.energy = state.evaluation.energy;
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result.history.push_back(rec);
    if (hooks.on_iteration && !hooks.on_iteration(state, rec)) {
      result.reason = StopReason::kInterrupted;
      break;
    }
  }
  return result;
}

DensitySet refine(const DensitySet& densities, const Grid& coarse, const Grid& fine) {
  if (coarse.dim() != fine.dim() || coarse.boundary_mode() != fine.boundary_mode()) {
    throw std::invalid_argument("incompatible grids: dimension or boundary mode differ");
  }
  if (coarse.periodic()) {
    const Box ce = coarse.extent();
    const Box fe = fine.extent();
    for (int a = 0; a < coarse.dim(); ++a) {
      const double tol = 1e-9 * std::max(1.0, ce.extent(a));
      if (std::abs(ce.lo[a] - fe.lo[a]) > tol || std::abs(ce.hi[a] - fe.hi[a]) > tol) {
        throw std::invalid_argument("incompatible grids: periodic cells differ");
      }
    }
  }
  if (densities.nodes() != coarse.size()) throw std::invalid_argument("densities do not match coarse grid");

  const int dim = coarse.dim();
  const double h = coarse.spacing();
  const Point origin = coarse.position(Index{0});
  const auto& shape = coarse.shape();
  const bool periodic = coarse.periodic();

  DensitySet out;
  out.mode = densities.mode;
  out.cells.resize(fine.size(), densities.count());
  const bool multiphase = densities.mode == ConstraintMode::kMultiphase;
  if (multiphase) out.void_phase.resize(fine.size());

  for (Index node = 0; node < fine.size(); ++node) {
    const Point p = fine.position(node);
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
    std::array<double, 3> t{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      double c = (p[a] - origin[a]) / h;
      if (periodic) {
        c = std::fmod(c, double(shape[a]));
        if (c < 0.0) c += shape[a];
        lo[a] = std::min(static_cast<int>(std::floor(c)), shape[a] - 1);
        hi[a] = (lo[a] + 1) % shape[a];
        t[a] = c - lo[a];
      } else {
        c = std::clamp(c, 0.0, double(shape[a] - 1));
        lo[a] = std::min(static_cast<int>(std::floor(c)), shape[a] - 2);
        hi[a] = lo[a] + 1;
        t[a] = c - lo[a];
      }
    }
    const int corners = 1 << dim;
    out.cells.row(node).setZero();
    if (multiphase) out.void_phase[node] = 0.0;
    for (int corner = 0; corner < corners; ++corner) {
      std::array<int, 3> ijk{0, 0, 0};
      double w = 1.0;
      for (int a = 0; a < dim; ++a) {
        const bool upper = (corner >> a) & 1;
        ijk[a] = upper ? hi[a] : lo[a];
        w *= upper ? t[a] : 1.0 - t[a];
      }
      if (w == 0.0) continue;
      const Index src = coarse.index(ijk);
      out.cells.row(node) += w * densities.cells.row(src);
      if (multiphase) out.void_phase[node] += w * densities.void_phase[src];
    }
  }
  return project_to_partition(std::move(out), fine.mask());
}

std::vector<ContinuationLevel> optimize_with_continuation(const DomainSpec& domain, BoundaryMode mode, int n,
                                                          std::span<const int> schedule, std::uint64_t seed,
                                                          const OptimizerOptions& options,
                                                          ConstraintMode constraint) {
  if (schedule.empty()) throw std::invalid_argument("empty continuation schedule");
  for (size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) throw std::invalid_argument("continuation resolutions must increase");
  }
  std::vector<ContinuationLevel> levels;
  std::optional<Grid> previous;
  DensitySet current;
  for (int resolution : schedule) {
    const auto t0 = Clock::now();
    Discretization disc = make_grid_discretization(build_grid(domain, resolution, mode),
                                                   options.order > 0 ? options.order : 6);
    DensitySet start = previous ? refine(current, *previous, *disc.grid) : random_init(n, disc, seed, constraint);
    ContinuationLevel level;
    level.resolution = resolution;
    level.result = optimize(disc, std::move(start), options);
    level.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    current = level.result.state.densities;
    previous = *disc.grid;
    levels.push_back(std::move(level));
  }
  return levels;
}

OptResult circle_packing_mode(const Discretization& disc, int n, std::uint64_t seed, const OptimizerOptions& options) {
  if (!(options.area_penalty >= 0.0)) throw std::invalid_argument("circle packing needs a non-negative area penalty");
  return optimize(disc, random_init(n, disc, seed, ConstraintMode::kMultiphase), options);
}

std::vector<double> equivalent_radii(const Evaluation& evaluation) {
  std::vector<double> radii;
  radii.reserve(evaluation.areas.size());
  for (double a : evaluation.areas) radii.push_back(std::sqrt(std::max(a, 0.0) / std::numbers::pi));
  return radii;
}

double optimal_disk_radius(double area_penalty) {
  constexpr double kBesselJ0FirstZero = 2.404825557695773;
  return std::pow(kBesselJ0FirstZero * kBesselJ0FirstZero / (area_penalty * std::numbers::pi), 0.25);
}

}  // namespace specpart
