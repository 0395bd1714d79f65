// prpc command line: batch experiment runner.
//
//   prpc run <config.json> [--threads N] [--budget N] [--seed N]
//   prpc demo <name> --out <dir> [--seed N] [--threads N]
//
// Exit codes: 0 ok, 2 config error, 3 budget exceeded, 4 requested
// feasibility unmet. Every error is also emitted as a structured JSON
// diagnostic on stderr (and diagnostic.json in the output directory when one
// is known).

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "prpc/experiment.hpp"
#include "prpc/version.hpp"

namespace {

using nlohmann::json;

void emit_diagnostic(const std::string& type, const std::string& message, int exit_code,
                     const std::filesystem::path& output_dir) {
  json diag;
  diag["error"] = {{"type", type}, {"message", message}, {"exit_code", exit_code}};
  std::cerr << diag.dump(2) << "\n";
  if (!output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (!ec) {
      std::ofstream out(output_dir / "diagnostic.json", std::ios::binary | std::ios::trunc);
      if (out) out << diag.dump(2) << "\n";
    }
  }
}

int run_command(const std::string& config_path, int threads, long long budget, long long seed,
                bool seed_given) {
  std::filesystem::path output_dir;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw prpc::ConfigError("cannot open config file: " + config_path);
    json config;
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      throw prpc::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (config.is_object() && config.contains("output_dir") && config["output_dir"].is_string()) {
      output_dir = config["output_dir"].get<std::string>();
    }
    if (seed_given) config["seed"] = seed;
    const prpc::RunArtifact artifact = prpc::run_experiment(config, threads, budget);
    if (artifact.exit_code == 4) {
      // artifact already written and sealed; diagnostic goes to stderr only
      emit_diagnostic("infeasible", "requested feasibility unmet (see result.json)", 4, {});
    }
    return artifact.exit_code;
  } catch (const prpc::ConfigError& e) {
    emit_diagnostic("config_error", e.what(), 2, output_dir);
    return 2;
  } catch (const prpc::BudgetExceeded& e) {
    emit_diagnostic("budget_exceeded", e.what(), 3, output_dir);
    return 3;
  } catch (const prpc::ContractViolation& e) {
    emit_diagnostic("config_error", e.what(), 2, output_dir);
    return 2;
  } catch (const std::exception& e) {
    emit_diagnostic("internal_error", e.what(), 1, output_dir);
    return 1;
  }
}

int demo_command(const std::string& name, const std::string& out_dir, long long seed,
                 int threads) {
  try {
    const prpc::RunArtifact artifact =
        prpc::demo(name, out_dir, static_cast<std::uint64_t>(seed), threads);
    return artifact.exit_code;
  } catch (const prpc::ConfigError& e) {
    emit_diagnostic("config_error", e.what(), 2, out_dir);
    return 2;
  } catch (const prpc::BudgetExceeded& e) {
    emit_diagnostic("budget_exceeded", e.what(), 3, out_dir);
    return 3;
  } catch (const std::exception& e) {
    emit_diagnostic("internal_error", e.what(), 1, out_dir);
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prpc: regularized-vs-constrained training toolkit"};
  app.set_version_flag("--version", PRPC_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string demo_name;
  std::string out_dir;
  int threads = 0;
  long long budget = 0;
  long long seed = 0;
  bool seed_given = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "path to the experiment JSON config")->required();
  run->add_option("--threads", threads, "worker threads for grid scans (0 = machine parallelism)");
  run->add_option("--budget", budget, "override the grid evaluation budget");
  run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_given = true;
  });

  CLI::App* demo = app.add_subcommand("demo", "run a pre-wired demonstration");
  demo->add_option("name", demo_name, "fig1a, fig1b, fig2a, fig2b, or relax_pitfall")->required();
  demo->add_option("--out", out_dir, "output directory")->required();
  demo->add_option("--seed", seed, "seed echoed into the manifest");
  demo->add_option("--threads", threads, "worker threads for grid scans");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return run_command(config_path, threads, budget, seed, seed_given);
  return demo_command(demo_name, out_dir, seed, threads);
}
