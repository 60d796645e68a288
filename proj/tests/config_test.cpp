#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "specpart/config.hpp"

using namespace specpart;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal() { return json{{"domain", {{"type", "box"}, {"hi", {1.0, 1.0}}}}}; }

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsAreFilledIn) {
  const RunConfig c = parse_config(minimal());
  EXPECT_EQ(c.resolution, 64);
  EXPECT_EQ(c.cells, 2);
  EXPECT_EQ(c.penalty, 1e4);
  EXPECT_EQ(c.order, 6);
  EXPECT_DOUBLE_EQ(c.initial_step, 1e-4);
  EXPECT_EQ(c.min_step, 1e-6);
  EXPECT_EQ(c.max_iter, 500);
  EXPECT_EQ(c.schedule(), std::vector<int>{64});
  EXPECT_EQ(c.dim(), 2);
  EXPECT_FALSE(c.surface());
  EXPECT_EQ(c.domain["lo"], json({0.0, 0.0}));
}

TEST(Config, SurfaceDefaults) {
  const RunConfig c = parse_config(json{{"domain", {{"type", "sphere"}}}, {"cells", 3}});
  EXPECT_TRUE(c.surface());
  EXPECT_EQ(c.order, 5);
  EXPECT_EQ(c.domain["subdivisions"], 4);
  const Discretization d = make_discretization(c);
  EXPECT_EQ(d.kind, DiscretizationKind::kSurface);
  EXPECT_EQ(d.size(), 2562);
}

TEST(Config, ErrorsNameTheField) {
  json j = minimal();
  j["cells"] = 0;
  EXPECT_EQ(error_of(j), "cells: must be at least 1 (got 0)");
  j = minimal();
  j["penalty"] = -1;
  EXPECT_EQ(error_of(j).rfind("penalty:", 0), 0u);
  j = minimal();
  j["celsl"] = 3;
  EXPECT_EQ(error_of(j), "celsl: unknown field");
  j = minimal();
  j["domain"]["radius"] = 1;
  EXPECT_EQ(error_of(j), "domain.radius: unknown field");
  j = minimal();
  j["domain"]["type"] = "hexagon";
  EXPECT_NE(error_of(j).find("domain.type"), std::string::npos);
  EXPECT_NE(error_of(json{{"cells", 2}}).find("domain: missing"), std::string::npos);
  j = minimal();
  j["classify"] = {{"k", 1}};
  EXPECT_EQ(error_of(j).rfind("classify.k:", 0), 0u);
}

TEST(Config, ConsistencyRules) {
  json j = minimal();
  j["continuation"] = {64, 32};
  EXPECT_NE(error_of(j).find("strictly increasing"), std::string::npos);
  j = minimal();
  j["mode"] = "multiphase";
  EXPECT_EQ(error_of(j).rfind("area_penalty:", 0), 0u);
  j["area_penalty"] = 100.0;
  EXPECT_EQ(error_of(j), "");
  j = minimal();
  j["area_penalty"] = 1.0;
  EXPECT_EQ(error_of(j).rfind("area_penalty:", 0), 0u);
  j = json{{"domain", {{"type", "disk"}, {"radius", 0.4}}}, {"boundary", "periodic"}};
  EXPECT_EQ(error_of(j).rfind("boundary:", 0), 0u);
  j = json{{"domain", {{"type", "sphere"}}}, {"continuation", {8, 16}}};
  EXPECT_EQ(error_of(j).rfind("continuation:", 0), 0u);
  j = json{{"domain", {{"type", "torus"}, {"major_radius", 0.3}, {"minor_radius", 0.5}}}};
  EXPECT_EQ(error_of(j).rfind("domain.major_radius:", 0), 0u);
}

TEST(Config, ContinuationSetsFinalResolution) {
  json j = minimal();
  j["continuation"] = {16, 32, 64};
  const RunConfig c = parse_config(j);
  EXPECT_EQ(c.resolution, 64);
  EXPECT_EQ(c.schedule(), (std::vector<int>{16, 32, 64}));
}

TEST(Config, EffectiveConfigRoundTrips) {
  json j = minimal();
  j["cells"] = 4;
  j["seed"] = 17;
  j["continuation"] = {8, 16};
  j["classify"] = {{"epsilon", 0.02}};
  const RunConfig a = parse_config(j);
  const json effective = to_json(a);
  const RunConfig b = parse_config(effective);
  EXPECT_EQ(to_json(b), effective);
  EXPECT_EQ(effective["seed"], 17);
  EXPECT_EQ(effective["classify"]["epsilon"], 0.02);
  EXPECT_EQ(effective["order"], 6);
}

TEST(Config, ImplicitDomainCombinesShapes) {
  json j = {{"domain",
             {{"type", "implicit"},
              {"bounds", {{"lo", {0, 0}}, {"hi", {1, 1}}}},
              {"include", {{{"type", "box"}, {"hi", {1, 1}}}}},
              {"exclude", {{{"type", "disk"}, {"center", {0.5, 0.5}}, {"radius", 0.25}}}}}}};
  const DomainSpec d = make_domain(parse_config(j));
  EXPECT_TRUE(d.contains({0.1, 0.1, 0}));
  EXPECT_FALSE(d.contains({0.5, 0.5, 0}));
}

TEST(Config, FileWithCommentsAndRelativeMeshPath) {
  const fs::path dir = fs::temp_directory_path() / "specpart_config_test";
  fs::create_directories(dir / "meshes");
  save_obj(dir / "meshes" / "s.obj", generate_sphere(1));
  std::ofstream(dir / "run.json") << "// surface run\n{\n  \"domain\": {\"type\": \"mesh\", \"path\": \"meshes/s.obj\"},\n"
                                     "  /* three cells */ \"cells\": 3\n}\n";
  const RunConfig c = load_config(dir / "run.json");
  EXPECT_EQ(c.cells, 3);
  EXPECT_EQ(make_mesh(c).vertex_count(), 42);
  std::ofstream(dir / "bad.json") << "{ \"cells\": }";
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(Config, DomainErrorsBecomeConfigErrors) {
  const json j = {{"domain", {{"type", "polygon"}, {"vertices", {{0, 0}, {1, 0}, {1, 0.001}}}}}, {"resolution", 8}};
  const RunConfig c = parse_config(j);
  EXPECT_THROW(make_discretization(c), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  int count = 0;
  for (const auto& entry : fs::recursive_directory_iterator(SPECPART_CONFIG_DIR)) {
    if (entry.path().extension() != ".json" || entry.path().filename() == "expected.json") continue;
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(load_config(entry.path()));
    ++count;
  }
  EXPECT_GE(count, 10);
}
