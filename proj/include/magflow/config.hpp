#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "magflow/flow.hpp"
#include "magflow/force.hpp"
#include "magflow/geometry.hpp"

namespace magflow {

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment. Duplicate keys are an error.
KeyValues parse_key_values(const std::string& text, const std::string& origin = "<config>");
KeyValues read_key_value_file(const std::filesystem::path& path);

/// Every key the configuration schema accepts.
const std::set<std::string>& known_keys();

/// Numbers may carry a factor of pi and one division: "0.5", "4pi", "2pi/10000", "pi".
double parse_number(const std::string& text, const std::string& key = "");
std::vector<double> parse_list(const std::string& text, const std::string& key = "");

struct ModelSpec {
  std::string kind = "flat_torus";
  double radius = 1.0;
  double major = 2.0;
  double minor = 0.5;
  int dim = 2;
};

struct ForceSpec {
  std::string kind = "none";
  std::vector<double> B{0.0, 0.0, 1.0};
  double c = 1.0;
  int degree = 1;
  std::string samples;
  double scale = 1.0;
};

struct InitialSpec {
  std::string kind = "fourier";
  std::vector<std::vector<double>> components;  ///< per ambient component: c0, a1, b1, a2, b2, ...
  std::vector<double> winding;
  std::vector<double> phi{0.0};
  std::vector<double> height{0.0};
  int phi_winding = 0;
  double A = 1.0, B = 0.5, mu = 0.5;
  std::string file;
  double normal_offset = 0.0;
  double noise = 0.0;
};

struct PairSpec {
  double delta = 1e-3;
  double force_scale = 1.0 + 1e-3;
  double t0 = 1.0;
  int mode = 2;
};

/// Fully validated run description.
struct RunConfig {
  std::string preset;
  std::string experiment = "single";
  std::string expect = "complete";
  ModelSpec model;
  ForceSpec force;
  InitialSpec initial;
  FlowConfig flow;
  double dirichlet_half_length = 0.0;
  double witness_T = 1.0;
  PairSpec pair;
  std::set<std::string> monitors{"energy", "residual"};
  std::filesystem::path output_dir;
  bool plots = true;
  std::uint64_t seed = 1;
  std::filesystem::path base_dir = ".";  ///< relative file names resolve against this
  KeyValues resolved;                    ///< effective key-value map after preset expansion
};

/// Expands `preset`, applies the user's keys on top, rejects unknown keys and
/// validates every value. Throws ConfigError.
RunConfig build_run_config(const KeyValues& user, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

ManifoldModel make_model(const RunConfig& config);
ForceField make_force(const RunConfig& config, const ManifoldModel& model);
LoopState make_initial_loop(const RunConfig& config, const ManifoldModel& model);
/// Flow configuration including the Dirichlet boundary of the line witness.
FlowConfig make_flow_config(const RunConfig& config);

}  // namespace magflow
