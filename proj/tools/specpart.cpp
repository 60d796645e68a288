// specpart command line driver: run, resume, classify, export.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "specpart/config.hpp"
#include "specpart/run.hpp"

namespace {

std::atomic<bool> g_interrupt{false};

extern "C" void on_signal(int) { g_interrupt.store(true); }

int report_failure(const std::exception& e) {
  const specpart::ExitCode code = specpart::exit_code_for(e);
  const char* kind = code == specpart::kExitConfigError       ? "config error"
                     : code == specpart::kExitNumericalFailure ? "numerical failure"
                                                               : "error";
  std::cerr << "specpart: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal spectral partitions by penalized eigenvalue relaxation"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, run_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
  std::optional<std::string> output;
  bool quiet = false;

  auto* run_cmd = app.add_subcommand("run", "Optimize a partition described by a JSON config");
  run_cmd->add_option("config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "Override the random seed");
  run_cmd->add_option("--max-iter", max_iter, "Override the iteration limit per level");
  run_cmd->add_option("--output", output, "Override the output directory");
  run_cmd->add_flag("-q,--quiet", quiet, "No progress output");

  auto* resume_cmd = app.add_subcommand("resume", "Continue a run from its checkpoint");
  resume_cmd->add_option("checkpoint", checkpoint_path, "checkpoint.bin of an earlier run")
      ->required()
      ->check(CLI::ExistingFile);
  resume_cmd->add_option("--max-iter", max_iter, "Override the iteration limit per level");
  resume_cmd->add_option("--output", output, "Override the output directory");
  resume_cmd->add_flag("-q,--quiet", quiet, "No progress output");

  auto* classify_cmd = app.add_subcommand("classify", "Recompute the classification report of a run");
  classify_cmd->add_option("run-dir", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);

  auto* export_cmd = app.add_subcommand("export", "Write label fields, boundaries and meshes of a run");
  export_cmd->add_option("run-dir", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : specpart::kExitConfigError;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  specpart::RunControl control;
  control.interrupt = &g_interrupt;
  control.log = quiet ? nullptr : &std::cerr;

  try {
    if (*run_cmd) {
      nlohmann::json j = specpart::read_config_file(config_path);
      if (seed) j["seed"] = *seed;
      if (max_iter) j["max_iter"] = *max_iter;
      if (output) j["output"] = *output;
      const specpart::RunConfig config =
          specpart::parse_config(j, std::filesystem::path(config_path).parent_path());
      const auto outcome = specpart::run(config, control);
      if (outcome.code == specpart::kExitOk) std::cout << outcome.output.string() << "\n";
      return outcome.code;
    }
    if (*resume_cmd) {
      const auto outcome = specpart::resume(checkpoint_path, {max_iter, output}, control);
      if (outcome.code == specpart::kExitOk) std::cout << outcome.output.string() << "\n";
      return outcome.code;
    }
    if (*classify_cmd) {
      const auto report = specpart::classify_run(run_dir, &std::cerr);
      std::cout << report.dump(2) << "\n";
      return specpart::kExitOk;
    }
    if (*export_cmd) {
      for (const auto& path : specpart::export_run(run_dir)) std::cout << path.string() << "\n";
      return specpart::kExitOk;
    }
  } catch (const std::exception& e) {
    return report_failure(e);
  }
  return specpart::kExitOk;
}
