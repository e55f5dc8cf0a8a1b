#include <algorithm>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "magflow/acceptance.hpp"
#include "magflow/errors.hpp"
#include "magflow/presets.hpp"
#include "magflow/runner.hpp"

using namespace magflow;

namespace {

int report(const RunResult& r) {
  std::cout << r.summary << "\n";
  if (!r.output_dir.empty() && r.exit_code != kExitConfigError) std::cout << "  output: " << r.output_dir.string() << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magflow: heat flow for magnetic geodesics and p-branes on embedded manifolds"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Run a configuration file");
  run->add_option("config", config_path, "key = value configuration file")->required();
  run->add_option("--out", out_dir, "Output directory (default <config stem>.out)");

  std::string preset_name;
  std::vector<std::string> overrides;
  auto* preset = app.add_subcommand("preset", "Run a named preset");
  preset->add_option("name", preset_name, "Preset name (see list-presets)")->required();
  preset->add_option("--set", overrides, "Override key=value (repeatable)");
  preset->add_option("--out", out_dir, "Output directory (default <name>.out)");

  std::string sweep_dir;
  unsigned jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "Run every *.cfg file of a directory concurrently");
  sweep->add_option("dir", sweep_dir, "Directory of configuration files")->required();
  sweep->add_option("--jobs", jobs, "Worker threads (default: hardware concurrency)");

  auto* list = app.add_subcommand("list-presets", "Print the preset catalog");

  int only = 0;
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite and print a pass/fail table");
  verify->add_option("--only", only, "Run a single criterion (1-10)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return report(run_config_file(config_path, out_dir));
    if (*preset) return report(run_preset(preset_name, parse_overrides(overrides), out_dir));
    if (*sweep) {
      int worst = kExitOk;
      for (const RunResult& r : run_sweep(sweep_dir, jobs)) worst = std::max(worst, report(r));
      return worst;
    }
    if (*list) {
      for (const Preset& p : preset_catalog()) {
        std::cout << p.name << "\n  " << p.description << "\n";
        for (const auto& [k, v] : p.values) std::cout << "    " << k << " = " << v << "\n";
      }
      return kExitOk;
    }
    if (*verify) {
      std::vector<CriterionResult> results;
      if (only > 0) {
        results.push_back(run_criterion(only));
      } else {
        for (int id = 1; id <= kCriterionCount; ++id) {
          results.push_back(run_criterion(id));
          std::cout << format_result(results.back()) << std::endl;
        }
      }
      if (only > 0) std::cout << format_result(results.back()) << "\n";
      const bool all = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
      std::cout << (all ? "all criteria passed" : "some criteria FAILED") << "\n";
      return all ? kExitOk : kExitMonitorViolation;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
