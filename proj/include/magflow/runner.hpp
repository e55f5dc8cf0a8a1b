#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "magflow/config.hpp"

namespace magflow {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitMonitorViolation = 3,
  kExitIntegratorError = 4,
};

struct RunResult {
  int exit_code = kExitOk;
  std::string summary;
  std::filesystem::path output_dir;
  nlohmann::json report;
};

/// Runs a validated configuration. Artifacts are written to config.output_dir
/// when it is set; the report is returned either way.
RunResult run_experiment(const RunConfig& config);

/// `run <config>`: loads the file, defaults the output directory to
/// `<stem>.out` beside it. Configuration problems become exit code 2.
RunResult run_config_file(const std::filesystem::path& path, const std::filesystem::path& output_override = {});

/// `preset <name>` with key overrides; output defaults to `./<name>.out`.
RunResult run_preset(const std::string& name, const KeyValues& overrides,
                     const std::filesystem::path& output_override = {});

/// `sweep <dir>`: every *.cfg file in the directory (sorted), run concurrently
/// on up to `threads` workers. Two configs resolving to the same output
/// directory are rejected before anything runs.
std::vector<RunResult> run_sweep(const std::filesystem::path& dir, unsigned threads = 0);

/// Parses `key=value` override strings.
KeyValues parse_overrides(const std::vector<std::string>& items);

}  // namespace magflow
