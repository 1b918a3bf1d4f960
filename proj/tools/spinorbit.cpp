#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spinorbit/verify.hpp"

namespace {

constexpr const char* kVersion = "spinorbit 1.0.0";

std::filesystem::path default_out_dir(const std::string& scenario_path) {
  if (const char* env = std::getenv("SPINORBIT_OUT"); env && *env)
    return std::filesystem::path(env);
  return std::filesystem::path("runs") / std::filesystem::path(scenario_path).stem();
}

void print_checks(const std::vector<spinorbit::CheckResult>& checks) {
  for (const auto& c : checks) {
    std::printf("check %-28s %s  residual=%.3e  tol=%.0e%s%s\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.residual, c.tolerance,
                c.note.empty() ? "" : "  ", c.note.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"integrable spin-orbit dynamics: simulation and verification"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);

  std::string scenario_path, out_dir_flag;
  auto* run_cmd = app.add_subcommand("run", "integrate a scenario file and write artifacts");
  run_cmd->add_option("scenario", scenario_path, "scenario file (key = value lines)")
      ->required();
  run_cmd->add_option("--out", out_dir_flag, "output directory (default runs/<name>)");

  std::string suite_name;
  long seed = 0;
  int trials = 0;
  auto* verify_cmd = app.add_subcommand("verify", "run a randomized verification suite");
  verify_cmd->add_option("suite", suite_name, "suite name")->required();
  verify_cmd->add_option("--seed", seed, "random seed (default 0)");
  verify_cmd->add_option("--trials", trials, "trial count (suite-specific default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const auto sc = spinorbit::load_scenario(scenario_path);
      const auto out_dir =
          out_dir_flag.empty() ? default_out_dir(scenario_path) : std::filesystem::path(out_dir_flag);
      const auto result = spinorbit::run_scenario(sc, out_dir);
      print_checks(result.checks);
      if (!result.message.empty()) std::printf("%s\n", result.message.c_str());
      std::printf("artifacts in %s\n", out_dir.string().c_str());
      std::printf("status %d\n", result.status);
      return result.status;
    }
    if (verify_cmd->parsed()) {
      const auto result = spinorbit::verify_suite(suite_name, seed, trials);
      std::printf("suite %s (seed %ld)\n", result.name.c_str(), seed);
      print_checks(result.checks);
      std::printf("%s\n", result.pass() ? "PASS" : "FAIL");
      return result.pass() ? 0 : 1;
    }
    std::cout << app.help();
    return 0;
  } catch (const spinorbit::ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const spinorbit::SingularityError& e) {
    std::fprintf(stderr, "singularity: %s\n", e.what());
    return 3;
  } catch (const spinorbit::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
