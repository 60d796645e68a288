#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "specpart/run.hpp"

using namespace specpart;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "specpart_run_test" / name;
  fs::remove_all(dir);
  return dir;
}

RunConfig square_config(const std::string& name) {
  json j = {{"domain", {{"type", "box"}, {"hi", {1.0, 1.0}}}},
            {"continuation", {12, 24}},
            {"cells", 2},
            {"initial_step", 0.01},
            {"max_iter", 12},
            {"checkpoint_interval", 4},
            {"threads", 2},
            {"output", scratch(name).string()}};
  return parse_config(j);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

// energy.csv without the wall-clock column.
std::vector<std::string> trace_rows(const fs::path& dir) {
  std::ifstream in(dir / kEnergyFile);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

}  // namespace

TEST(Run, WritesEveryArtifact) {
  const RunConfig c = square_config("basic");
  const RunOutcome out = run(c);
  EXPECT_EQ(out.code, kExitOk);
  for (const char* f : {kCheckpointFile, kReportFile, kEnergyFile, kClassificationFile}) {
    EXPECT_TRUE(fs::exists(out.output / f)) << f;
  }
  EXPECT_TRUE(fs::exists(out.output / kExportDir / "labels.csv"));
  EXPECT_TRUE(fs::exists(out.output / kExportDir / "boundary.csv"));

  const json report = read_json(out.output / kReportFile);
  EXPECT_EQ(report["status"], "finished");
  ASSERT_EQ(report["levels"].size(), 2u);
  EXPECT_EQ(report["levels"][1]["resolution"], 24);
  EXPECT_EQ(report["levels"][1]["degrees_of_freedom"], 2 * 24 * 24);
  EXPECT_EQ(report["levels"][0]["iterations"].size(), 12u);
  EXPECT_EQ(report["final"]["energy"].get<double>(), out.final_energy);
  EXPECT_EQ(report["final"]["cells"].size(), 2u);
  EXPECT_EQ(report["config"], to_json(c));
  EXPECT_TRUE(read_checkpoint(out.output / kCheckpointFile).finished);

  const json cls = read_json(out.output / kClassificationFile);
  EXPECT_EQ(cls["neighbor_counts"], json({1, 1}));
  EXPECT_EQ(trace_rows(out.output).size(), 1u + 24u);
}

TEST(Run, ResumeReproducesTheUninterruptedRun) {
  const RunOutcome full = run(square_config("full"));
  ASSERT_EQ(full.code, kExitOk);

  const RunConfig c = square_config("split");
  RunControl stop;
  stop.stop_after = 7;
  const RunOutcome first = run(c, stop);
  EXPECT_EQ(first.code, kExitInterrupted);
  EXPECT_EQ(read_json(first.output / kReportFile)["status"], "interrupted");
  const Checkpoint cp = read_checkpoint(first.output / kCheckpointFile);
  EXPECT_FALSE(cp.finished);
  EXPECT_EQ(cp.iteration, 7);

  RunControl stop_again;
  stop_again.stop_after = 9;
  EXPECT_EQ(resume(first.output / kCheckpointFile, {}, stop_again).code, kExitInterrupted);
  const RunOutcome second = resume(first.output / kCheckpointFile);
  EXPECT_EQ(second.code, kExitOk);
  EXPECT_NEAR(second.final_energy, full.final_energy, 1e-10 * full.final_energy);
  EXPECT_EQ(trace_rows(second.output), trace_rows(full.output));
}

TEST(Run, ResumeOverridesMaxIterAndOutput) {
  const RunConfig c = square_config("override");
  const RunOutcome a = run(c);
  ResumeOverrides o;
  o.max_iter = 15;
  o.output = scratch("override_more").string();
  const RunOutcome b = resume(a.output / kCheckpointFile, o);
  EXPECT_EQ(b.output, fs::path(*o.output));
  const json report = read_json(b.output / kReportFile);
  EXPECT_EQ(report["config"]["max_iter"], 15);
  EXPECT_EQ(report["levels"][1]["iterations"].size(), 15u);
  EXPECT_LE(b.final_energy, a.final_energy);
}

TEST(Run, InterruptFlagCheckpointsAndStops) {
  std::atomic<bool> flag = true;
  RunControl control;
  control.interrupt = &flag;
  const RunOutcome out = run(square_config("flag"), control);
  EXPECT_EQ(out.code, kExitInterrupted);
  EXPECT_EQ(read_checkpoint(out.output / kCheckpointFile).iteration, 1);
}

TEST(Run, ReportedSizesMatchTheSolvesPerformed) {
  const RunConfig c = square_config("sizes");
  std::atomic<long long> solves = 0, total = 0;
  RunControl control;
  control.on_solve = [&](int, Index size) {
    ++solves;
    total += size;
  };
  const RunOutcome out = run(c, control);
  const json report = read_json(out.output / kReportFile);
  long long records = 0;
  double reported = 0.0;
  for (const auto& level : report["levels"]) {
    for (const auto& it : level["iterations"]) {
      reported += it["eig_size"]["mean"].get<double>() * c.cells;
      ++records;
    }
  }
  // One extra evaluation per level for the starting state.
  EXPECT_EQ(solves.load(), (records + 2) * c.cells);
  EXPECT_LE(reported, static_cast<double>(total.load()));
  for (const auto& level : report["levels"]) {
    const double nodes = level["nodes"].get<double>();
    for (const auto& it : level["iterations"]) EXPECT_LE(it["eig_size"]["max"].get<double>(), nodes);
  }
}

TEST(Run, EffectiveConfigReproducesTheRun) {
  const RunOutcome a = run(square_config("effective_a"));
  json effective = read_json(a.output / kReportFile)["config"];
  effective["output"] = scratch("effective_b").string();
  const RunOutcome b = run(parse_config(effective));
  EXPECT_EQ(a.final_energy, b.final_energy);
}

TEST(Run, ThreeDimensionalCellsExportMeshes) {
  json j = {{"domain", {{"type", "box"}, {"hi", {1.0, 1.0, 1.0}}}},
            {"resolution", 10},
            {"cells", 4},
            {"initial_step", 0.01},
            {"max_iter", 20},
            {"classify", {{"k", 4}}},
            {"output", scratch("cube").string()}};
  const RunOutcome out = run(parse_config(j));
  ASSERT_EQ(out.code, kExitOk);
  for (int i = 0; i < 4; ++i) {
    EXPECT_TRUE(fs::exists(out.output / kExportDir / ("cell_" + std::to_string(i) + ".obj"))) << i;
  }
  const json cls = read_json(out.output / kClassificationFile);
  ASSERT_EQ(cls["cells"].size(), 4u);
  for (const auto& cell : cls["cells"]) {
    if (cell.contains("error")) continue;
    EXPECT_GT(cell["volume"].get<double>(), 0.0);
    EXPECT_TRUE(cell.contains("scale_invariant"));
  }
}

TEST(Run, SurfaceRunExportsLabeledPly) {
  json j = {{"domain", {{"type", "sphere"}, {"subdivisions", 2}}},
            {"cells", 3},
            {"initial_step", 0.01},
            {"max_iter", 5},
            {"output", scratch("sphere").string()}};
  const RunOutcome out = run(parse_config(j));
  ASSERT_EQ(out.code, kExitOk);
  EXPECT_TRUE(fs::exists(out.output / kExportDir / "labels.ply"));
  EXPECT_EQ(read_json(out.output / kReportFile)["discretization"]["kind"], "surface");
}

TEST(Run, ClassifyAndExportFromRunDirectory) {
  const RunOutcome out = run(square_config("post"));
  fs::remove(out.output / kClassificationFile);
  fs::remove_all(out.output / kExportDir);
  const json cls = classify_run(out.output);
  EXPECT_TRUE(fs::exists(out.output / kClassificationFile));
  EXPECT_EQ(cls["neighbor_counts"], json({1, 1}));
  EXPECT_FALSE(export_run(out.output).empty());
  EXPECT_THROW(classify_run(scratch("nothing_here")), std::exception);
}

TEST(Run, ExitCodesForErrors) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfigError);
  EXPECT_EQ(exit_code_for(CheckpointError("x")), kExitConfigError);
  EXPECT_EQ(exit_code_for(CellVanished(0)), kExitNumericalFailure);
  EXPECT_EQ(exit_code_for(fs::filesystem_error("x", std::error_code())), kExitIoError);
}
