#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specpart/partition_opt.hpp"

namespace specpart {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iteration history of one continuation level.
struct LevelTrace {
  int resolution = 0;
  std::vector<IterationRecord> records;
  /// Empty while the level is in progress.
  std::string stop_reason;
  double seconds = 0.0;
  int vanish_events = 0;
};

/// Resumable optimizer state.
///
/// Binary layout (host byte order): 8-byte magic, u32 version, the effective
/// config as JSON text, level/iteration/step, the density matrix, the trace
/// of every level so far, and a trailing FNV-1a checksum of all preceding
/// bytes.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json config;
  /// Index into the continuation schedule of the current level.
  int level = 0;
  /// True once the last level has stopped.
  bool finished = false;
  int iteration = 0;
  double step = 0.0;
  DensitySet densities;
  std::vector<LevelTrace> levels;
};

/// Writes through a temporary file and a rename.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace specpart
