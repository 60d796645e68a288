#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specpart/checkpoint.hpp"
#include "specpart/config.hpp"
#include "specpart/partition_opt.hpp"

namespace specpart {

enum ExitCode : int {
  kExitOk = 0,
  kExitIoError = 1,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
  kExitInterrupted = 4,
};

struct RunControl {
  /// Polled after every iteration; when set the run checkpoints and stops.
  const std::atomic<bool>* interrupt = nullptr;
  /// Stop as if interrupted after this many iterations (negative: never).
  int stop_after = -1;
  /// Progress lines; nullptr for silence.
  std::ostream* log = nullptr;
  SolveObserver on_solve;
};

struct RunOutcome {
  ExitCode code = kExitOk;
  std::filesystem::path output;
  double final_energy = 0.0;
  std::vector<double> eigenvalues;
};

/// File names inside a run directory.
inline constexpr const char* kCheckpointFile = "checkpoint.bin";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kEnergyFile = "energy.csv";
inline constexpr const char* kClassificationFile = "classification.json";
inline constexpr const char* kExportDir = "export";

/// Optimizes, checkpoints every config.checkpoint_interval iterations, and
/// writes report, energy trace, classification and exports into
/// config.output. Returns kExitInterrupted after checkpointing when stopped.
RunOutcome run(const RunConfig& config, const RunControl& control = {});

struct ResumeOverrides {
  std::optional<int> max_iter;
  std::optional<std::string> output;
};

/// Continues from a checkpoint with the configuration embedded in it.
RunOutcome resume(const std::filesystem::path& checkpoint, const ResumeOverrides& overrides = {},
                  const RunControl& control = {});

/// Classification report of a state; `evaluation` supplies the cell eigenvalues.
nlohmann::json classify_state(const RunConfig& config, const Discretization& disc, const DensitySet& densities,
                              const Evaluation& evaluation);

/// Per-cell label field and boundaries (2D), per-cell OBJ meshes (3D) or a
/// labeled PLY (surfaces) in `dir`. Returns the files written.
std::vector<std::filesystem::path> export_state(const RunConfig& config, const Discretization& disc,
                                                const DensitySet& densities, const std::filesystem::path& dir);

/// Recomputes classification.json from the run directory's checkpoint.
nlohmann::json classify_run(const std::filesystem::path& run_dir, std::ostream* log = nullptr);
/// Rewrites the export directory from the run directory's checkpoint.
std::vector<std::filesystem::path> export_run(const std::filesystem::path& run_dir);

/// Exit code for an exception thrown by the functions above.
ExitCode exit_code_for(const std::exception& error);

}  // namespace specpart
