#include "specpart/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "specpart/classify.hpp"
#include "specpart/isosurface.hpp"

namespace specpart {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

json size_stats(const std::vector<Index>& sizes) {
  if (sizes.empty()) return {{"min", 0}, {"mean", 0.0}, {"max", 0}};
  Index lo = sizes[0], hi = sizes[0];
  double total = 0.0;
  for (Index s : sizes) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    total += static_cast<double>(s);
  }
  return {{"min", lo}, {"mean", total / static_cast<double>(sizes.size())}, {"max", hi}};
}

struct Timings {
  double setup = 0.0;
  double optimize = 0.0;
  double classify = 0.0;
  double exports = 0.0;
};

std::pair<Index, Index> level_nodes(const RunConfig& config, int resolution) {
  const Grid g = build_grid(make_domain(config), resolution, config.boundary);
  return {g.size(), g.in_domain_count()};
}

json make_report(const RunConfig& config, const std::vector<LevelTrace>& levels, const Discretization& disc,
                 const Evaluation* final_eval, const Timings& t, const std::string& status,
                 const json& classification) {
  json report;
  report["status"] = status;
  report["config"] = to_json(config);
  report["discretization"] = {
      {"kind", disc.kind == DiscretizationKind::kGrid ? "grid" : "surface"},
      {"nodes", disc.size()},
      {"in_domain_nodes", std::count(disc.mask.begin(), disc.mask.end(), 1)},
      {"degrees_of_freedom", static_cast<Index>(config.cells) * disc.size()},
      {"measure", disc.measure()},
  };
  if (disc.grid) report["discretization"]["spacing"] = disc.grid->spacing();
  if (disc.mesh) report["discretization"]["triangles"] = disc.mesh->triangle_count();

  json jl = json::array();
  for (const auto& level : levels) {
    json entry = {{"stop_reason", level.stop_reason}, {"seconds", level.seconds}, {"vanish_events", level.vanish_events}};
    if (!config.surface()) {
      const auto [nodes, inside] = level_nodes(config, level.resolution);
      entry["resolution"] = level.resolution;
      entry["nodes"] = nodes;
      entry["degrees_of_freedom"] = static_cast<Index>(config.cells) * nodes;
    }
    json its = json::array();
    double mean_total = 0.0;
    for (const auto& r : level.records) {
      its.push_back({{"iteration", r.iteration},
                     {"energy", r.energy},
                     {"step", r.step},
                     {"accepted", r.accepted},
                     {"eig_size", {{"min", r.min_size}, {"mean", r.mean_size}, {"max", r.max_size}}},
                     {"seconds", r.seconds}});
      mean_total += r.mean_size;
    }
    entry["iterations"] = its;
    entry["average_eig_size"] = level.records.empty() ? 0.0 : mean_total / static_cast<double>(level.records.size());
    jl.push_back(entry);
  }
  report["levels"] = jl;

  if (final_eval) {
    json cells = json::array();
    for (std::size_t i = 0; i < final_eval->eigenvalues.size(); ++i) {
      cells.push_back({{"cell", i},
                       {"eigenvalue", final_eval->eigenvalues[i]},
                       {"area", final_eval->areas[i]},
                       {"eig_size", final_eval->problem_sizes[i]}});
    }
    report["final"] = {{"energy", final_eval->energy},
                       {"cells", cells},
                       {"eig_size", size_stats(final_eval->problem_sizes)}};
  }
  report["timing"] = {{"setup", t.setup},
                      {"optimize", t.optimize},
                      {"classify", t.classify},
                      {"export", t.exports},
                      {"total", t.setup + t.optimize + t.classify + t.exports}};
  if (!classification.is_null()) {
    json summary = {{"neighbor_counts", classification["neighbor_counts"]}};
    if (classification.contains("classes")) summary["class_sizes"] = classification["classes"]["sizes"];
    report["classification"] = summary;
  }
  return report;
}

std::string energy_csv(const std::vector<LevelTrace>& levels) {
  std::ostringstream out;
  out << "level,resolution,iteration,energy,step,accepted,min_size,mean_size,max_size,seconds\n";
  out << std::setprecision(17);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (const auto& r : levels[l].records) {
      out << l << ',' << levels[l].resolution << ',' << r.iteration << ',' << r.energy << ',' << r.step << ','
          << (r.accepted ? 1 : 0) << ',' << r.min_size << ',' << r.mean_size << ',' << r.max_size << ',' << r.seconds
          << '\n';
    }
  }
  return out.str();
}

RunOutcome drive(RunConfig config, const Checkpoint* from, const RunControl& control) {
  const fs::path out_dir = config.output;
  fs::create_directories(out_dir);
  std::ostream* log = control.log;

  const std::vector<int> schedule = config.surface() ? std::vector<int>{0} : config.schedule();
  const OptimizerOptions options = config.optimizer_options();
  std::vector<LevelTrace> levels = from ? from->levels : std::vector<LevelTrace>{};
  const int first_level = from ? from->level : 0;
  if (first_level < 0 || first_level >= static_cast<int>(schedule.size())) {
    throw CheckpointError("checkpoint level does not match the continuation schedule");
  }

  Timings timings;
  int iterations_here = 0;
  std::optional<Discretization> previous;
  DensitySet current;
  OptResult result;
  Discretization disc;

  for (int l = first_level; l < static_cast<int>(schedule.size()); ++l) {
    auto t0 = Clock::now();
    disc = make_discretization(config, schedule[l]);
    timings.setup += seconds_since(t0);

    DensitySet start;
    OptimizeHooks hooks;
    hooks.on_solve = control.on_solve;
    if (from && l == from->level) {
      start = from->densities;
      if (start.nodes() != disc.size() || start.count() != config.cells || start.mode != config.mode) {
        throw CheckpointError("checkpoint densities do not match the configured problem");
      }
      hooks.start_step = from->step;
      hooks.start_iteration = from->iteration;
      levels.resize(l + 1);
    } else {
      start = previous ? refine(current, *previous->grid, *disc.grid)
                       : random_init(config.cells, disc, config.seed, config.mode);
      levels.resize(l + 1);
      levels[l] = LevelTrace{};
      levels[l].resolution = schedule[l];
    }
    LevelTrace& trace = levels[l];
    trace.stop_reason.clear();

    if (log) {
      *log << "level " << l + 1 << "/" << schedule.size() << ": " << disc.size() << " nodes, "
           << config.cells << " cells\n";
    }
    auto checkpoint_of = [&](const OptState& state) {
      Checkpoint c;
      c.config = to_json(config);
      c.level = l;
      c.iteration = state.iteration;
      c.step = state.step;
      c.densities = state.densities;
      c.levels = levels;
      return c;
    };
    hooks.on_iteration = [&](const OptState& state, const IterationRecord& rec) {
      trace.records.push_back(rec);
      ++iterations_here;
      if (log) {
        *log << "  it " << std::setw(4) << rec.iteration << "  E " << std::setprecision(10) << rec.energy
             << "  step " << std::setprecision(3) << rec.step << (rec.accepted ? "  accepted" : "  rejected")
             << "  |R| " << rec.min_size << "/" << static_cast<Index>(std::lround(rec.mean_size)) << "/"
             << rec.max_size << "\n";
      }
      if (rec.iteration % config.checkpoint_interval == 0) write_checkpoint(out_dir / kCheckpointFile, checkpoint_of(state));
      const bool interrupted = control.interrupt && control.interrupt->load();
      return !(interrupted || (control.stop_after >= 0 && iterations_here >= control.stop_after));
    };

    t0 = Clock::now();
    result = optimize(disc, std::move(start), options, hooks);
    const double spent = seconds_since(t0);
    timings.optimize += spent;
    trace.seconds += spent;
    trace.vanish_events += result.vanish_events;
    if (result.reason == StopReason::kInterrupted) {
      write_checkpoint(out_dir / kCheckpointFile, checkpoint_of(result.state));
      write_text(out_dir / kReportFile,
                 make_report(config, levels, disc, &result.state.evaluation, timings, "interrupted", json()).dump(2));
      write_text(out_dir / kEnergyFile, energy_csv(levels));
      if (log) *log << "interrupted; checkpoint written to " << (out_dir / kCheckpointFile).string() << "\n";
      return {kExitInterrupted, out_dir, result.state.evaluation.energy, result.state.evaluation.eigenvalues};
    }
    trace.stop_reason = to_string(result.reason);
    if (log) *log << "  stopped: " << trace.stop_reason << ", energy " << std::setprecision(10) << result.state.evaluation.energy << "\n";
    current = result.state.densities;
    previous = disc;
  }

  Checkpoint final_state;
  final_state.config = to_json(config);
  final_state.level = static_cast<int>(schedule.size()) - 1;
  final_state.finished = true;
  final_state.iteration = result.state.iteration;
  final_state.step = result.state.step;
  final_state.densities = result.state.densities;
  final_state.levels = levels;
  write_checkpoint(out_dir / kCheckpointFile, final_state);

  json classification;
  if (config.classify.enabled) {
    const auto t0 = Clock::now();
    classification = classify_state(config, disc, result.state.densities, result.state.evaluation);
    write_text(out_dir / kClassificationFile, classification.dump(2));
    timings.classify = seconds_since(t0);
  }
  if (config.export_results) {
    const auto t0 = Clock::now();
    export_state(config, disc, result.state.densities, out_dir / kExportDir);
    timings.exports = seconds_since(t0);
  }
  write_text(out_dir / kReportFile,
             make_report(config, levels, disc, &result.state.evaluation, timings, "finished", classification).dump(2));
  write_text(out_dir / kEnergyFile, energy_csv(levels));
  return {kExitOk, out_dir, result.state.evaluation.energy, result.state.evaluation.eigenvalues};
}

struct LoadedState {
  RunConfig config;
  Checkpoint checkpoint;
  Discretization disc;
};

LoadedState load_state(const fs::path& run_dir) {
  LoadedState s;
  s.checkpoint = read_checkpoint(run_dir / kCheckpointFile);
  s.config = parse_config(s.checkpoint.config);
  const std::vector<int> schedule = s.config.surface() ? std::vector<int>{0} : s.config.schedule();
  s.disc = make_discretization(s.config, schedule.at(s.checkpoint.level));
  if (s.checkpoint.densities.nodes() != s.disc.size()) {
    throw CheckpointError("checkpoint densities do not match the configured problem");
  }
  return s;
}

}  // namespace

RunOutcome run(const RunConfig& config, const RunControl& control) { return drive(config, nullptr, control); }

RunOutcome resume(const fs::path& checkpoint_path, const ResumeOverrides& overrides, const RunControl& control) {
  const Checkpoint c = read_checkpoint(checkpoint_path);
  json j = c.config;
  if (overrides.max_iter) j["max_iter"] = *overrides.max_iter;
  if (overrides.output) j["output"] = *overrides.output;
  return drive(parse_config(j), &c, control);
}

json classify_state(const RunConfig& config, const Discretization& disc, const DensitySet& densities,
                    const Evaluation& evaluation) {
  const ClassifyConfig& cc = config.classify;
  json out;
  out["level"] = cc.level;
  const CellAdjacencyGraph graph = count_cell_neighbors(densities.cells, disc.adjacency, cc.level);
  out["neighbor_counts"] = graph.neighbor_counts;
  out["edges"] = graph.edges;
  out["empty_cells"] = graph.empty_cells;

  const bool volumetric = disc.grid && disc.grid->dim() == 3;
  json cells = json::array();
  std::vector<SpectralSignature> signatures;
  std::vector<int> signed_cells;
  for (int i = 0; i < densities.count(); ++i) {
    json cell = {{"cell", i}, {"eigenvalue", evaluation.eigenvalues[i]}, {"neighbors", graph.neighbor_counts[i]}};
    if (!volumetric) {
      cell["area"] = evaluation.areas[i];
      if (disc.grid && evaluation.areas[i] > 0.0) cell["eigenvalue_times_area"] = evaluation.eigenvalues[i] * evaluation.areas[i];
      cells.push_back(cell);
      continue;
    }
    try {
      const TriMesh mesh = extract_isosurface(*disc.grid, densities.cells.col(i), cc.level);
      const double volume = enclosed_volume(mesh);
      cell["volume"] = volume;
      cell["surface_vertices"] = mesh.vertex_count();
      cell["scale_invariant"] = scale_invariant_eigenvalue(evaluation.eigenvalues[i], volume);
      SpectralSignature sig = spectral_signature(mesh, cc.k);
      cell["signature"] = std::vector<double>(sig.vector.data(), sig.vector.data() + sig.vector.size());
      signatures.push_back(std::move(sig));
      signed_cells.push_back(i);
    } catch (const std::exception& e) {
      cell["error"] = e.what();
    }
    cells.push_back(cell);
  }
  out["cells"] = cells;
  if (volumetric) {
    const ClassPartition classes = classify_cells(signatures, cc.epsilon);
    json distances = json::array();
    for (Index r = 0; r < classes.distances.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < classes.distances.cols(); ++c) row.push_back(classes.distances(r, c));
      distances.push_back(row);
    }
    out["classes"] = {{"epsilon", cc.epsilon},
                      {"k", cc.k},
                      {"cells", signed_cells},
                      {"assignment", classes.assignment},
                      {"sizes", classes.class_sizes()},
                      {"distances", distances}};
  }
  return out;
}

std::vector<fs::path> export_state(const RunConfig& config, const Discretization& disc, const DensitySet& densities,
                                   const fs::path& dir) {
  (void)config;
  fs::create_directories(dir);
  std::vector<fs::path> written;
  const std::vector<int> labels = argmax_labels(densities.cells, disc.mask);

  if (disc.mesh) {
    const fs::path p = dir / "labels.ply";
    save_ply(p, *disc.mesh, labels);
    written.push_back(p);
    return written;
  }

  const Grid& grid = *disc.grid;
  {
    std::ostringstream csv;
    csv << std::setprecision(10) << (grid.dim() == 2 ? "x,y,label\n" : "x,y,z,label\n");
    for (Index x = 0; x < grid.size(); ++x) {
      if (labels[x] < 0) continue;
      const Point p = grid.position(x);
      csv << p[0] << ',' << p[1] << ',';
      if (grid.dim() == 3) csv << p[2] << ',';
      csv << labels[x] << '\n';
    }
    const fs::path p = dir / "labels.csv";
    write_text(p, csv.str());
    written.push_back(p);
  }
  if (grid.dim() == 2) {
    std::ostringstream csv;
    csv << std::setprecision(10) << "cell,x0,y0,x1,y1\n";
    for (int i = 0; i < densities.count(); ++i) {
      try {
        for (const Segment& s : extract_contour(grid, densities.cells.col(i), config.classify.level)) {
          csv << i << ',' << s[0] << ',' << s[1] << ',' << s[2] << ',' << s[3] << '\n';
        }
      } catch (const IsosurfaceError&) {
        // empty cell: no boundary
      }
    }
    const fs::path p = dir / "boundary.csv";
    write_text(p, csv.str());
    written.push_back(p);
  } else {
    for (int i = 0; i < densities.count(); ++i) {
      try {
        const TriMesh mesh = extract_isosurface(grid, densities.cells.col(i), config.classify.level);
        const fs::path p = dir / ("cell_" + std::to_string(i) + ".obj");
        save_obj(p, mesh);
        written.push_back(p);
      } catch (const IsosurfaceError&) {
        // empty or wrapping cell: no mesh
      }
    }
  }
  return written;
}

json classify_run(const fs::path& run_dir, std::ostream* log) {
  const LoadedState s = load_state(run_dir);
  OptimizerOptions options = s.config.optimizer_options();
  const Evaluation ev = energy_and_gradients(s.checkpoint.densities, s.disc, options);
  json out = classify_state(s.config, s.disc, s.checkpoint.densities, ev);
  write_text(run_dir / kClassificationFile, out.dump(2));
  if (log) *log << "wrote " << (run_dir / kClassificationFile).string() << "\n";
  return out;
}

std::vector<fs::path> export_run(const fs::path& run_dir) {
  const LoadedState s = load_state(run_dir);
  return export_state(s.config, s.disc, s.checkpoint.densities, run_dir / kExportDir);
}

ExitCode exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const CheckpointError*>(&error)) return kExitConfigError;
  if (dynamic_cast<const EigenSolveError*>(&error) || dynamic_cast<const CellVanished*>(&error) ||
      dynamic_cast<const IsosurfaceError*>(&error)) {
    return kExitNumericalFailure;
  }
  if (dynamic_cast<const std::invalid_argument*>(&error)) return kExitConfigError;
  return kExitIoError;
}

}  // namespace specpart
