// Command-line driver for the planning pipeline.
//
// Exit codes: 0 success, 1 internal failure, 2 configuration error,
// 3 infeasible plan, 4 contact force out of bounds (plan-simulate).

#include "ctotp/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <regex>
#include <string>

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kInfeasible = 3 };

void apply_grid(ctotp::RunConfig& cfg, const std::string& spec) {
  static const std::regex pattern(R"((\d+)[xX](\d+))");
  std::smatch m;
  if (!std::regex_match(spec, m, pattern)) {
    throw ctotp::ConfigError("expected N_lambda x N_lambdadot such as 500x5000", "--grid");
  }
  cfg.grid.n_lambda = std::stoul(m[1]);
  cfg.grid.n_lambdadot = std::stoul(m[2]);
  try {
    cfg.grid.validate();
  } catch (const ctotp::ConfigError& e) {
    throw ctotp::ConfigError(e.message(), "--grid");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-time path parametrization under interaction wrench bounds"};
  std::string config_file, mode_name = "plan", out_dir, grid;
  bool no_wrench = false;
  unsigned seed = 0;
  app.add_option("--config", config_file, "TOML run configuration")->required();
  app.add_option("--mode", mode_name, "plan | plan-compare | plan-simulate")
      ->check(CLI::IsMember({"plan", "plan-compare", "plan-simulate"}));
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--grid", grid, "grid size N_lambda x N_lambdadot, e.g. 200x400");
  app.add_flag("--no-wrench", no_wrench, "plan with the raw torque limits only");
  app.add_option("--seed", seed, "seed for randomized checks (unused by planning)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const std::map<std::string, ctotp::RunMode> modes{
      {"plan", ctotp::RunMode::kPlan},
      {"plan-compare", ctotp::RunMode::kPlanCompare},
      {"plan-simulate", ctotp::RunMode::kPlanSimulate}};
  try {
    ctotp::RunConfig cfg = ctotp::load_config(config_file);
    if (!grid.empty()) apply_grid(cfg, grid);
    const std::filesystem::path out =
        out_dir.empty() ? std::filesystem::path(cfg.resolve(cfg.output.dir))
                        : std::filesystem::path(out_dir);
    const ctotp::RunResult r = ctotp::run(cfg, modes.at(mode_name), out, no_wrench);
    std::cout << r.report;
    return r.exit_code;
  } catch (const ctotp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ctotp::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ctotp::UnsupportedError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ctotp::InfeasibleLimitsError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ctotp::InfeasiblePlanError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
