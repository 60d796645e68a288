#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specpart/discretization.hpp"
#include "specpart/eigensolve.hpp"
#include "specpart/grid.hpp"
#include "specpart/partition_opt.hpp"

namespace specpart {

/// Invalid or inconsistent configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClassifyConfig {
  bool enabled = true;
  double level = 0.5;
  int k = 10;
  double epsilon = 0.01;
};

/// Everything a run needs. Parsed from JSON; every default is filled in so
/// that to_json() gives the effective configuration.
struct RunConfig {
  /// Grid domains: box, disk, ball, ellipse, triangle, polygon, tetrahedron,
  /// implicit. Surfaces: sphere, torus, mesh.
  nlohmann::json domain;
  int resolution = 64;
  /// Grid resolutions solved in turn; the last one is the final grid.
  std::vector<int> continuation;
  BoundaryMode boundary = BoundaryMode::kDirichletBox;
  int cells = 2;
  double penalty = 1e4;
  /// Neighborhood padding (grid hops or mesh edge hops); 0 picks 6 on grids, 5 on surfaces.
  int order = 0;
  double threshold = 0.01;
  /// 0 picks 1 / penalty.
  double initial_step = 0.0;
  double min_step = 1e-6;
  int max_iter = 500;
  std::uint64_t seed = 1;
  ConstraintMode mode = ConstraintMode::kPartition;
  double area_penalty = 0.0;
  VanishPolicy on_vanish = VanishPolicy::kAbort;
  int threads = 0;
  double eig_tol = 1e-8;
  EigBackend eig_backend = EigBackend::kAuto;
  std::string output = "specpart-run";
  int checkpoint_interval = 25;
  ClassifyConfig classify;
  bool export_results = true;

  bool surface() const;
  int dim() const;
  /// continuation if set, otherwise {resolution}.
  std::vector<int> schedule() const;
  OptimizerOptions optimizer_options() const;
};

/// Validates and fills defaults. Relative mesh paths resolve against base_dir.
RunConfig parse_config(const nlohmann::json& json, const std::filesystem::path& base_dir = {});
/// JSON (comments allowed) without validation.
nlohmann::json read_config_file(const std::filesystem::path& path);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Grid domain described by config.domain; throws ConfigError for surfaces.
DomainSpec make_domain(const RunConfig& config);
/// Surface mesh described by config.domain; throws ConfigError for grid domains.
TriMesh make_mesh(const RunConfig& config);

/// Discretization of the final (or given) resolution.
Discretization make_discretization(const RunConfig& config, int resolution = 0);

const char* to_string(EigBackend backend);
const char* to_string(VanishPolicy policy);

}  // namespace specpart
