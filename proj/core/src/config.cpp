#include "specpart/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace specpart {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(where.empty() ? key : where + "." + key, "unknown field");
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where + key, "missing");
  if (!obj[key].is_number()) fail(where + key, "must be a number");
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

long long integer_or(const json& obj, const std::string& key, long long fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail(where + key, "must be an integer");
  return obj[key].get<long long>();
}

std::vector<double> vector_of(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where + key, "missing");
  const json& v = obj[key];
  if (!v.is_array() || v.empty()) fail(where + key, "must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(where + key, "must be a non-empty array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Point point_of(const std::vector<double>& v) {
  Point p{0.0, 0.0, 0.0};
  std::copy(v.begin(), v.end(), p.begin());
  return p;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) fail(field, what);
}

const std::set<std::string> kSurfaceTypes = {"sphere", "torus", "mesh"};

std::string domain_type(const json& domain, const std::string& where) {
  if (!domain.is_object()) fail(where, "must be an object");
  if (!domain.contains("type") || !domain["type"].is_string()) fail(where + ".type", "missing or not a string");
  return domain["type"].get<std::string>();
}

// Normalizes a grid domain description and returns it with defaults filled.
json normalize_grid_domain(const json& d, const std::string& where) {
  const std::string type = domain_type(d, where);
  const std::string w = where + ".";
  json out = {{"type", type}};
  if (type == "box") {
    reject_unknown(d, where, {"type", "lo", "hi"});
    const auto hi = vector_of(d, "hi", w);
    require(hi.size() == 2 || hi.size() == 3, w + "hi", "must have 2 or 3 entries");
    const auto lo = d.contains("lo") ? vector_of(d, "lo", w) : std::vector<double>(hi.size(), 0.0);
    require(lo.size() == hi.size(), w + "lo", "must match the length of hi");
    for (std::size_t a = 0; a < hi.size(); ++a) require(hi[a] > lo[a], w + "hi", "must exceed lo on every axis");
    out["lo"] = lo;
    out["hi"] = hi;
  } else if (type == "disk" || type == "ball") {
    reject_unknown(d, where, {"type", "center", "radius"});
    const std::size_t dim = type == "disk" ? 2 : 3;
    const auto center = d.contains("center") ? vector_of(d, "center", w) : std::vector<double>(dim, 0.5);
    require(center.size() == dim, w + "center", "must have " + std::to_string(dim) + " entries");
    const double r = number(d, "radius", w);
    require(r > 0.0, w + "radius", "must be positive");
    out["center"] = center;
    out["radius"] = r;
  } else if (type == "ellipse") {
    reject_unknown(d, where, {"type", "center", "semi_axes"});
    const auto center = d.contains("center") ? vector_of(d, "center", w) : std::vector<double>{0.0, 0.0};
    const auto axes = vector_of(d, "semi_axes", w);
    require(center.size() == 2, w + "center", "must have 2 entries");
    require(axes.size() == 2 && axes[0] > 0.0 && axes[1] > 0.0, w + "semi_axes", "must be 2 positive numbers");
    out["center"] = center;
    out["semi_axes"] = axes;
  } else if (type == "triangle") {
    reject_unknown(d, where, {"type", "side"});
    const double side = number_or(d, "side", 1.0, w);
    require(side > 0.0, w + "side", "must be positive");
    out["side"] = side;
  } else if (type == "polygon") {
    reject_unknown(d, where, {"type", "vertices"});
    if (!d.contains("vertices") || !d["vertices"].is_array() || d["vertices"].size() < 3) {
      fail(w + "vertices", "must list at least 3 points");
    }
    for (const auto& v : d["vertices"]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        fail(w + "vertices", "every vertex must be [x, y]");
      }
    }
    out["vertices"] = d["vertices"];
  } else if (type == "tetrahedron") {
    reject_unknown(d, where, {"type", "edge", "vertices"});
    if (d.contains("vertices")) {
      const json& v = d["vertices"];
      if (!v.is_array() || v.size() != 4) fail(w + "vertices", "must list 4 points");
      for (const auto& p : v) {
        if (!p.is_array() || p.size() != 3) fail(w + "vertices", "every vertex must be [x, y, z]");
        for (const auto& c : p) {
          if (!c.is_number()) fail(w + "vertices", "every vertex must be [x, y, z]");
        }
      }
      out["vertices"] = v;
    } else {
      const double edge = number_or(d, "edge", 1.0, w);
      require(edge > 0.0, w + "edge", "must be positive");
      out["edge"] = edge;
    }
  } else if (type == "implicit") {
    reject_unknown(d, where, {"type", "bounds", "include", "exclude"});
    if (!d.contains("bounds")) fail(w + "bounds", "missing");
    json bounds = normalize_grid_domain(json{{"type", "box"}, {"lo", d["bounds"].value("lo", json())},
                                             {"hi", d["bounds"].value("hi", json())}},
                                        w + "bounds");
    out["bounds"] = {{"lo", bounds["lo"]}, {"hi", bounds["hi"]}};
    for (const char* key : {"include", "exclude"}) {
      json list = json::array();
      if (d.contains(key)) {
        if (!d[key].is_array()) fail(w + key, "must be an array of shapes");
        for (std::size_t i = 0; i < d[key].size(); ++i) {
          list.push_back(normalize_grid_domain(d[key][i], w + key + "[" + std::to_string(i) + "]"));
        }
      }
      out[key] = list;
    }
  } else if (kSurfaceTypes.count(type)) {
    fail(where + ".type", "'" + type + "' is a surface, not a grid domain");
  } else {
    fail(where + ".type", "unknown domain type '" + type + "'");
  }
  return out;
}

json normalize_surface_domain(const json& d, const std::filesystem::path& base_dir) {
  const std::string type = domain_type(d, "domain");
  json out = {{"type", type}};
  if (type == "sphere") {
    reject_unknown(d, "domain", {"type", "subdivisions", "radius"});
    const long long s = integer_or(d, "subdivisions", 4, "domain.");
    require(s >= 0 && s <= 8, "domain.subdivisions", "must be in [0, 8]");
    const double r = number_or(d, "radius", 1.0, "domain.");
    require(r > 0.0, "domain.radius", "must be positive");
    out["subdivisions"] = s;
    out["radius"] = r;
  } else if (type == "torus") {
    reject_unknown(d, "domain", {"type", "major_radius", "minor_radius", "segments"});
    const double big = number_or(d, "major_radius", 1.0, "domain.");
    const double small = number_or(d, "minor_radius", 0.5, "domain.");
    require(small > 0.0, "domain.minor_radius", "must be positive");
    require(big > small, "domain.major_radius", "must exceed minor_radius");
    std::vector<double> seg = d.contains("segments") ? vector_of(d, "segments", "domain.") : std::vector<double>{64, 32};
    require(seg.size() == 2 && seg[0] >= 3 && seg[1] >= 3, "domain.segments", "must be two integers >= 3");
    out["major_radius"] = big;
    out["minor_radius"] = small;
    out["segments"] = {static_cast<int>(seg[0]), static_cast<int>(seg[1])};
  } else if (type == "mesh") {
    reject_unknown(d, "domain", {"type", "path"});
    if (!d.contains("path") || !d["path"].is_string()) fail("domain.path", "missing or not a string");
    std::filesystem::path p = d["path"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    out["path"] = p.lexically_normal().string();
  } else {
    fail("domain.type", "unknown surface type '" + type + "'");
  }
  return out;
}

int grid_dim(const json& d) {
  const std::string type = d["type"];
  if (type == "box") return static_cast<int>(d["hi"].size());
  if (type == "implicit") return static_cast<int>(d["bounds"]["hi"].size());
  if (type == "ball" || type == "tetrahedron") return 3;
  return 2;
}

DomainSpec domain_from_json(const json& d) {
  const std::string type = d["type"];
  if (type == "box") {
    const auto lo = d["lo"].get<std::vector<double>>();
    Box b;
    b.dim = static_cast<int>(lo.size());
    b.lo = point_of(lo);
    b.hi = point_of(d["hi"].get<std::vector<double>>());
    return DomainSpec::box(b);
  }
  if (type == "disk" || type == "ball") {
    const auto c = d["center"].get<std::vector<double>>();
    return DomainSpec::ball(static_cast<int>(c.size()), point_of(c), d["radius"].get<double>());
  }
  if (type == "ellipse") {
    const auto axes = d["semi_axes"].get<std::vector<double>>();
    return DomainSpec::ellipse(point_of(d["center"].get<std::vector<double>>()), axes[0], axes[1]);
  }
  if (type == "triangle") return DomainSpec::equilateral_triangle(d["side"].get<double>());
  if (type == "polygon") return DomainSpec::polygon(d["vertices"].get<std::vector<std::array<double, 2>>>());
  if (type == "tetrahedron") {
    if (d.contains("edge")) return DomainSpec::regular_tetrahedron(d["edge"].get<double>());
    std::array<Point, 4> v;
    for (int i = 0; i < 4; ++i) v[i] = point_of(d["vertices"][i].get<std::vector<double>>());
    return DomainSpec::tetrahedron(v);
  }
  // implicit: inside the bounds, inside some include (or no includes), outside every exclude.
  Box b;
  const auto lo = d["bounds"]["lo"].get<std::vector<double>>();
  b.dim = static_cast<int>(lo.size());
  b.lo = point_of(lo);
  b.hi = point_of(d["bounds"]["hi"].get<std::vector<double>>());
  std::vector<DomainSpec> include, exclude;
  for (const auto& s : d["include"]) include.push_back(domain_from_json(s));
  for (const auto& s : d["exclude"]) exclude.push_back(domain_from_json(s));
  return DomainSpec::implicit(
      b,
      [include, exclude](const Point& p) {
        const bool in = include.empty() ||
                        std::any_of(include.begin(), include.end(), [&](const DomainSpec& s) { return s.contains(p); });
        return in && std::none_of(exclude.begin(), exclude.end(), [&](const DomainSpec& s) { return s.contains(p); });
      },
      "implicit");
}

template <class Enum>
Enum parse_enum(const json& obj, const std::string& key, Enum fallback, Enum (*parse)(const std::string&)) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail(key, "must be a string");
  try {
    return parse(obj[key].get<std::string>());
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

VanishPolicy vanish_policy_from_string(const std::string& s) {
  if (s == "abort") return VanishPolicy::kAbort;
  if (s == "reinitialize") return VanishPolicy::kReinitialize;
  throw std::invalid_argument("expected 'abort' or 'reinitialize', got '" + s + "'");
}

EigBackend backend_from_string(const std::string& s) {
  if (s == "auto") return EigBackend::kAuto;
  if (s == "direct") return EigBackend::kDirect;
  if (s == "iterative") return EigBackend::kIterative;
  throw std::invalid_argument("expected 'auto', 'direct' or 'iterative', got '" + s + "'");
}

}  // namespace

const char* to_string(EigBackend backend) {
  switch (backend) {
    case EigBackend::kDirect: return "direct";
    case EigBackend::kIterative: return "iterative";
    default: return "auto";
  }
}

const char* to_string(VanishPolicy policy) {
  return policy == VanishPolicy::kReinitialize ? "reinitialize" : "abort";
}

bool RunConfig::surface() const { return kSurfaceTypes.count(domain.value("type", "")) > 0; }

int RunConfig::dim() const { return surface() ? 2 : grid_dim(domain); }

std::vector<int> RunConfig::schedule() const {
  return continuation.empty() ? std::vector<int>{resolution} : continuation;
}

OptimizerOptions RunConfig::optimizer_options() const {
  OptimizerOptions o;
  o.penalty = penalty;
  o.order = order;
  o.threshold = threshold;
  o.initial_step = initial_step;
  o.min_step = min_step;
  o.max_iter = max_iter;
  o.area_penalty = area_penalty;
  o.on_vanish = on_vanish;
  o.threads = threads;
  o.eig.tol = eig_tol;
  o.eig.backend = eig_backend;
  return o;
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j, "",
                 {"domain", "resolution", "continuation", "boundary", "cells", "penalty", "order", "threshold",
                  "initial_step", "min_step", "max_iter", "seed", "mode", "area_penalty", "on_vanish", "threads",
                  "eig_tol", "eig_backend", "output", "checkpoint_interval", "classify", "export"});
  RunConfig c;
  if (!j.contains("domain")) fail("domain", "missing");
  const std::string type = domain_type(j["domain"], "domain");
  c.domain = kSurfaceTypes.count(type) ? normalize_surface_domain(j["domain"], base_dir)
                                       : normalize_grid_domain(j["domain"], "domain");

  c.resolution = static_cast<int>(integer_or(j, "resolution", c.resolution, ""));
  require(c.resolution >= 3, "resolution", "must be at least 3");
  if (j.contains("continuation")) {
    if (!j["continuation"].is_array()) fail("continuation", "must be an array of resolutions");
    for (const auto& r : j["continuation"]) {
      if (!r.is_number_integer() || r.get<int>() < 3) fail("continuation", "entries must be integers >= 3");
      c.continuation.push_back(r.get<int>());
    }
    for (std::size_t i = 1; i < c.continuation.size(); ++i) {
      require(c.continuation[i] > c.continuation[i - 1], "continuation", "must be strictly increasing");
    }
    if (!c.continuation.empty()) c.resolution = c.continuation.back();
  }
  c.boundary = parse_enum(j, "boundary", c.boundary, &boundary_mode_from_string);

  c.cells = static_cast<int>(integer_or(j, "cells", c.cells, ""));
  require(c.cells >= 1, "cells", "must be at least 1 (got " + std::to_string(c.cells) + ")");
  c.penalty = number_or(j, "penalty", c.penalty, "");
  require(c.penalty > 0.0, "penalty", "must be positive");
  c.order = static_cast<int>(integer_or(j, "order", 0, ""));
  require(c.order >= 0, "order", "must be non-negative");
  if (c.order == 0) c.order = c.surface() ? 5 : 6;
  c.threshold = number_or(j, "threshold", c.threshold, "");
  require(c.threshold > 0.0 && c.threshold < 1.0, "threshold", "must lie in (0, 1)");
  c.initial_step = number_or(j, "initial_step", 0.0, "");
  require(c.initial_step >= 0.0, "initial_step", "must be non-negative");
  if (c.initial_step == 0.0) c.initial_step = 1.0 / c.penalty;
  c.min_step = number_or(j, "min_step", c.min_step, "");
  require(c.min_step > 0.0, "min_step", "must be positive");
  c.max_iter = static_cast<int>(integer_or(j, "max_iter", c.max_iter, ""));
  require(c.max_iter >= 0, "max_iter", "must be non-negative");
  const long long seed = integer_or(j, "seed", static_cast<long long>(c.seed), "");
  require(seed >= 0, "seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.mode = parse_enum(j, "mode", c.mode, &constraint_mode_from_string);
  c.area_penalty = number_or(j, "area_penalty", c.area_penalty, "");
  if (c.mode == ConstraintMode::kMultiphase) {
    require(c.area_penalty > 0.0, "area_penalty", "must be positive in multiphase mode");
  } else {
    require(c.area_penalty == 0.0, "area_penalty", "only applies in multiphase mode");
  }
  c.on_vanish = parse_enum(j, "on_vanish", c.on_vanish, &vanish_policy_from_string);
  c.threads = static_cast<int>(integer_or(j, "threads", c.threads, ""));
  require(c.threads >= 0, "threads", "must be non-negative");
  c.eig_tol = number_or(j, "eig_tol", c.eig_tol, "");
  require(c.eig_tol > 0.0 && c.eig_tol < 1.0, "eig_tol", "must lie in (0, 1)");
  c.eig_backend = parse_enum(j, "eig_backend", c.eig_backend, &backend_from_string);
  if (j.contains("output")) {
    if (!j["output"].is_string() || j["output"].get<std::string>().empty()) fail("output", "must be a path");
    c.output = j["output"].get<std::string>();
  }
  c.checkpoint_interval = static_cast<int>(integer_or(j, "checkpoint_interval", c.checkpoint_interval, ""));
  require(c.checkpoint_interval >= 1, "checkpoint_interval", "must be at least 1");

  if (j.contains("classify")) {
    const json& k = j["classify"];
    if (!k.is_object()) fail("classify", "must be an object");
    reject_unknown(k, "classify", {"enabled", "level", "k", "epsilon"});
    if (k.contains("enabled")) {
      if (!k["enabled"].is_boolean()) fail("classify.enabled", "must be true or false");
      c.classify.enabled = k["enabled"].get<bool>();
    }
    c.classify.level = number_or(k, "level", c.classify.level, "classify.");
    require(c.classify.level > 0.0 && c.classify.level < 1.0, "classify.level", "must lie in (0, 1)");
    c.classify.k = static_cast<int>(integer_or(k, "k", c.classify.k, "classify."));
    require(c.classify.k >= 2, "classify.k", "must be at least 2");
    c.classify.epsilon = number_or(k, "epsilon", c.classify.epsilon, "classify.");
    require(c.classify.epsilon > 0.0, "classify.epsilon", "must be positive");
  }
  if (j.contains("export")) {
    if (!j["export"].is_boolean()) fail("export", "must be true or false");
    c.export_results = j["export"].get<bool>();
  }

  if (c.surface()) {
    require(!j.contains("continuation"), "continuation", "only applies to grid domains");
    require(!j.contains("boundary"), "boundary", "only applies to grid domains");
  } else if (c.boundary == BoundaryMode::kPeriodic) {
    require(c.domain["type"] == "box", "boundary", "periodic mode needs a box domain");
  }
  return c;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_config_file(path), path.parent_path());
}

json to_json(const RunConfig& c) {
  json j = {
      {"domain", c.domain},
      {"cells", c.cells},
      {"penalty", c.penalty},
      {"order", c.order},
      {"threshold", c.threshold},
      {"initial_step", c.initial_step},
      {"min_step", c.min_step},
      {"max_iter", c.max_iter},
      {"seed", c.seed},
      {"mode", to_string(c.mode)},
      {"area_penalty", c.area_penalty},
      {"on_vanish", to_string(c.on_vanish)},
      {"threads", c.threads},
      {"eig_tol", c.eig_tol},
      {"eig_backend", to_string(c.eig_backend)},
      {"output", c.output},
      {"checkpoint_interval", c.checkpoint_interval},
      {"classify",
       {{"enabled", c.classify.enabled}, {"level", c.classify.level}, {"k", c.classify.k}, {"epsilon", c.classify.epsilon}}},
      {"export", c.export_results},
  };
  if (!c.surface()) {
    j["resolution"] = c.resolution;
    j["boundary"] = to_string(c.boundary);
    if (!c.continuation.empty()) j["continuation"] = c.continuation;
  }
  return j;
}

DomainSpec make_domain(const RunConfig& config) {
  if (config.surface()) throw ConfigError("domain: surface domains have no grid");
  try {
    return domain_from_json(config.domain);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
}

TriMesh make_mesh(const RunConfig& config) {
  const json& d = config.domain;
  const std::string type = d.value("type", "");
  if (type == "sphere") return generate_sphere(d["subdivisions"].get<int>(), d["radius"].get<double>());
  if (type == "torus") {
    return generate_torus(d["major_radius"].get<double>(), d["minor_radius"].get<double>(), d["segments"][0].get<int>(),
                          d["segments"][1].get<int>());
  }
  if (type == "mesh") return load_mesh(d["path"].get<std::string>());
  throw ConfigError("domain: '" + type + "' is not a surface");
}

Discretization make_discretization(const RunConfig& config, int resolution) {
  if (config.surface()) {
    TriMesh mesh;
    try {
      mesh = make_mesh(config);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("domain: ") + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError(std::string("domain: ") + e.what());
    }
    return make_surface_discretization(std::move(mesh), config.order);
  }
  try {
    return make_grid_discretization(build_grid(make_domain(config), resolution > 0 ? resolution : config.resolution,
                                               config.boundary),
                                    config.order);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
}

}  // namespace specpart
