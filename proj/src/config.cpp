#include "magflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "magflow/errors.hpp"
#include "magflow/presets.hpp"

namespace magflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

double parse_factor(const std::string& raw, const std::string& key) {
  std::string s = trim(raw);
  double scale = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    scale = kPi;
    s = trim(s.substr(0, s.size() - 2));
    if (s.empty() || s == "+") return scale;
    if (s == "-") return -scale;
    if (s.back() == '*') s = trim(s.substr(0, s.size() - 1));
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    config_error("'" + raw + "' is not a number" + (key.empty() ? "" : " (key " + key + ")"));
  }
  if (used != s.size()) config_error("'" + raw + "' is not a number" + (key.empty() ? "" : " (key " + key + ")"));
  return v * scale;
}

std::string get(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

double get_number(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_number(it->second, key);
}

int get_int(const KeyValues& kv, const std::string& key, int fallback) {
  const double v = get_number(kv, key, fallback);
  if (v != std::floor(v) || std::abs(v) > 1e9) config_error(key + " must be an integer");
  return static_cast<int>(v);
}

bool get_bool(const KeyValues& kv, const std::string& key, bool fallback) {
  const std::string v = get(kv, key, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  config_error(key + " must be true or false");
}

void require_one_of(const std::string& key, const std::string& value, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (value == o) return;
  std::string msg = key + " = '" + value + "' is not one of:";
  for (const char* o : options) msg += std::string(" ") + o;
  config_error(msg);
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Vec fourier_value(const std::vector<double>& coeffs, double s) {
  Vec out(1);
  double v = coeffs.empty() ? 0.0 : coeffs[0];
  for (std::size_t i = 1; i < coeffs.size(); ++i) {
    const int n = static_cast<int>((i + 1) / 2);
    v += coeffs[i] * (i % 2 ? std::cos(n * s) : std::sin(n * s));
  }
  out(0) = v;
  return out;
}

double series(const std::vector<double>& coeffs, double s) { return fourier_value(coeffs, s)(0); }

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) config_error(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
  }
  return kv;
}

KeyValues read_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "preset", "experiment", "expect",
      "model", "model.radius", "model.major", "model.minor", "model.dim",
      "force", "force.B", "force.c", "force.degree", "force.samples", "force.scale",
      "initial", "initial.c0", "initial.c1", "initial.c2", "initial.c3", "initial.winding",
      "initial.phi", "initial.height", "initial.phi_winding", "initial.A", "initial.B", "initial.mu",
      "initial.file", "initial.normal_offset", "initial.noise",
      "dirichlet.half_length", "dirichlet.T",
      "nodes", "dt", "t_end", "projection", "scheme", "time", "record_every",
      "tol.drift", "tol.residual", "blowup_factor",
      "pair.delta", "pair.force_scale", "pair.t0", "pair.mode",
      "monitors", "output.dir", "output.plots", "seed"};
  return keys;
}

double parse_number(const std::string& text, const std::string& key) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_factor(text, key);
  const double den = parse_factor(text.substr(slash + 1), key);
  if (den == 0.0) config_error("division by zero in '" + text + "'");
  return parse_factor(text.substr(0, slash), key) / den;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) config_error("empty entry in list for " + key);
    out.push_back(parse_number(item, key));
  }
  return out;
}

RunConfig build_run_config(const KeyValues& user, const std::filesystem::path& base_dir) {
  KeyValues kv;
  RunConfig cfg;
  cfg.base_dir = base_dir;
  if (const auto it = user.find("preset"); it != user.end()) {
    kv = find_preset(it->second).values;
    cfg.preset = it->second;
  }
  for (const auto& [k, v] : user) kv[k] = v;
  for (const auto& [k, v] : kv) {
    if (!known_keys().count(k)) config_error("unknown key '" + k + "'");
  }
  cfg.resolved = kv;

  cfg.experiment = get(kv, "experiment", "single");
  require_one_of("experiment", cfg.experiment, {"single", "stability_pair"});
  cfg.expect = get(kv, "expect", "complete");
  require_one_of("expect", cfg.expect, {"complete", "blowup"});

  ModelSpec& m = cfg.model;
  m.kind = get(kv, "model", "flat_torus");
  require_one_of("model", m.kind, {"sphere", "cylinder", "torus", "flat_torus", "line"});
  m.radius = get_number(kv, "model.radius", 1.0);
  m.major = get_number(kv, "model.major", 2.0);
  m.minor = get_number(kv, "model.minor", 0.5);
  m.dim = get_int(kv, "model.dim", 2);

  ForceSpec& f = cfg.force;
  f.kind = get(kv, "force", "none");
  require_one_of("force", f.kind,
                 {"none", "constant_cross", "radial_cross", "parallel_rotation", "linear_scalar",
                  "parallel_volume", "custom"});
  if (kv.count("force.B")) f.B = parse_list(kv.at("force.B"), "force.B");
  if (f.B.size() != 3) config_error("force.B needs three components");
  f.c = get_number(kv, "force.c", 1.0);
  f.degree = get_int(kv, "force.degree", 1);
  f.samples = get(kv, "force.samples", "");
  f.scale = get_number(kv, "force.scale", 1.0);
  if (f.kind == "custom" && f.samples.empty()) config_error("force = custom needs force.samples");

  InitialSpec& in = cfg.initial;
  in.kind = get(kv, "initial", "fourier");
  require_one_of("initial", in.kind, {"fourier", "cylinder", "case_a", "case_b", "samples", "witness"});
  for (int c = 0; c < 4; ++c) {
    const std::string key = "initial.c" + std::to_string(c);
    in.components.push_back(kv.count(key) ? parse_list(kv.at(key), key) : std::vector<double>{});
  }
  if (kv.count("initial.winding")) in.winding = parse_list(kv.at("initial.winding"), "initial.winding");
  for (double w : in.winding)
    if (w != std::floor(w)) config_error("initial.winding entries must be integers");
  if (kv.count("initial.phi")) in.phi = parse_list(kv.at("initial.phi"), "initial.phi");
  if (kv.count("initial.height")) in.height = parse_list(kv.at("initial.height"), "initial.height");
  in.phi_winding = get_int(kv, "initial.phi_winding", 0);
  in.A = get_number(kv, "initial.A", 1.0);
  in.B = get_number(kv, "initial.B", 0.5);
  in.mu = get_number(kv, "initial.mu", 0.5);
  in.file = get(kv, "initial.file", "");
  in.normal_offset = get_number(kv, "initial.normal_offset", 0.0);
  in.noise = get_number(kv, "initial.noise", 0.0);
  if (in.kind == "samples" && in.file.empty()) config_error("initial = samples needs initial.file");

  cfg.dirichlet_half_length = get_number(kv, "dirichlet.half_length", 0.0);
  cfg.witness_T = get_number(kv, "dirichlet.T", 1.0);
  if (m.kind == "line" && !(cfg.dirichlet_half_length > 0)) {
    config_error("model = line needs dirichlet.half_length > 0");
  }

  FlowConfig& fl = cfg.flow;
  fl.nodes = get_int(kv, "nodes", 64);
  if (m.kind == "line") {
    if (fl.nodes < 16) config_error("nodes must be >= 16");
  } else if (fl.nodes < 16 || !is_power_of_two(fl.nodes)) {
    config_error("nodes must be a power of two >= 16");
  }
  const std::string dt = get(kv, "dt", "auto");
  if (dt != "auto") {
    fl.dt = parse_number(dt, "dt");
    if (!(*fl.dt > 0)) config_error("dt must be positive");
  }
  fl.t_end = get_number(kv, "t_end", 1.0);
  if (!(fl.t_end >= 0)) config_error("t_end must be nonnegative");
  const std::string projection = get(kv, "projection", "every_step");
  require_one_of("projection", projection, {"every_step", "never"});
  fl.projection = projection == "never" ? ProjectionMode::Never : ProjectionMode::EveryStep;
  const std::string scheme = get(kv, "scheme", "central2");
  require_one_of("scheme", scheme, {"central2", "spectral"});
  fl.spatial = scheme == "spectral" ? SpatialScheme::Spectral : SpatialScheme::Central2;
  const std::string time = get(kv, "time", "euler");
  require_one_of("time", time, {"euler", "rk4"});
  fl.time = time == "rk4" ? TimeScheme::RK4 : TimeScheme::Euler;
  fl.record_every = get_int(kv, "record_every", 1);
  if (fl.record_every < 1) config_error("record_every must be >= 1");
  fl.drift_tolerance = get_number(kv, "tol.drift", 1e-12);
  fl.residual_tolerance = get_number(kv, "tol.residual", 1e-3);
  fl.blowup_factor = get_number(kv, "blowup_factor", 1e3);
  if (!(fl.blowup_factor > 1)) config_error("blowup_factor must exceed 1");

  cfg.pair.delta = get_number(kv, "pair.delta", 1e-3);
  cfg.pair.force_scale = get_number(kv, "pair.force_scale", 1.001);
  cfg.pair.t0 = get_number(kv, "pair.t0", 1.0);
  cfg.pair.mode = get_int(kv, "pair.mode", 2);
  if (cfg.pair.mode < 1) config_error("pair.mode must be >= 1");

  if (kv.count("monitors")) {
    cfg.monitors.clear();
    std::stringstream ss(kv.at("monitors"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      require_one_of("monitors", item, {"energy", "residual", "drift", "none"});
      if (item != "none") cfg.monitors.insert(item);
    }
  }
  if (const std::string dir = get(kv, "output.dir", ""); !dir.empty()) cfg.output_dir = base_dir / dir;
  cfg.plots = get_bool(kv, "output.plots", true);
  const double seed = get_number(kv, "seed", 1);
  if (seed < 0 || seed != std::floor(seed)) config_error("seed must be a nonnegative integer");
  cfg.seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return build_run_config(read_key_value_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

ManifoldModel make_model(const RunConfig& config) {
  const ModelSpec& m = config.model;
  if (m.kind == "sphere") return ManifoldModel::sphere(m.radius);
  if (m.kind == "cylinder") return ManifoldModel::cylinder(m.radius);
  if (m.kind == "torus") return ManifoldModel::torus_of_revolution(m.major, m.minor);
  if (m.kind == "line") return ManifoldModel::line();
  return ManifoldModel::flat_torus(m.dim);
}

ForceField make_force(const RunConfig& config, const ManifoldModel& model) {
  const ForceSpec& f = config.force;
  auto build = [&]() {
    if (f.kind == "constant_cross") return ForceField::constant_cross(model, {f.B[0], f.B[1], f.B[2]});
    if (f.kind == "radial_cross") return ForceField::radial_cross(model);
    if (f.kind == "parallel_rotation") return ForceField::parallel_rotation(model, f.c);
    if (f.kind == "linear_scalar") return ForceField::linear_scalar(model);
    if (f.kind == "parallel_volume") return ForceField::parallel_volume(model, f.c);
    if (f.kind == "custom") {
      const auto path = config.base_dir / f.samples;
      return ForceField::custom(model, f.degree, load_force_samples(path.string(), model.ambient_dim(), f.degree));
    }
    return ForceField::none(model);
  };
  const ForceField field = build();
  return f.scale == 1.0 ? field : field.scaled(f.scale);
}

LoopState make_initial_loop(const RunConfig& config, const ManifoldModel& model) {
  const InitialSpec& in = config.initial;
  const int n = config.flow.nodes;
  const int q = model.ambient_dim();
  Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(q, n);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(q);
  auto s_of = [n](int j) { return kTwoPi * j / n; };
  const bool cylindrical = in.kind == "cylinder" || in.kind == "case_a" || in.kind == "case_b";
  if (cylindrical && model.kind() != ModelKind::Cylinder) config_error("initial = " + in.kind + " needs model = cylinder");

  if (in.kind == "fourier") {
    if (!in.winding.empty() && static_cast<int>(in.winding.size()) != q) {
      config_error("initial.winding needs one entry per ambient component");
    }
    for (int c = 0; c < q; ++c) {
      const double w = in.winding.empty() ? 0.0 : in.winding[c];
      if (w != 0.0 && !model.is_flat_quotient()) config_error("winding loops need a flat torus");
      shift(c) = kTwoPi * w;
      for (int j = 0; j < n; ++j) pos(c, j) = series(in.components[c], s_of(j)) + w * s_of(j);
    }
  } else if (cylindrical) {
    const double r = model.radius();
    for (int j = 0; j < n; ++j) {
      const double s = s_of(j);
      double phi, z;
      if (in.kind == "case_a") {
        phi = in.A * std::cos(s);
        z = in.B * std::sin(s);
      } else if (in.kind == "case_b") {
        phi = s;
        z = in.mu * std::cos(s);
      } else {
        phi = series(in.phi, s) + in.phi_winding * s;
        z = series(in.height, s);
      }
      pos.col(j) << r * std::cos(phi), r * std::sin(phi), z;
    }
  } else if (in.kind == "samples") {
    std::ifstream file(config.base_dir / in.file);
    if (!file) config_error("cannot read initial samples " + (config.base_dir / in.file).string());
    std::string line;
    int row = 0;
    while (std::getline(file, line)) {
      if (trim(line).empty() || trim(line)[0] == '#') continue;
      const auto values = parse_list(line, "initial.file");
      if (static_cast<int>(values.size()) != q || row >= n) config_error("initial samples need N rows of q numbers");
      for (int c = 0; c < q; ++c) pos(c, row) = values[c];
      ++row;
    }
    if (row != n) config_error("initial samples file has " + std::to_string(row) + " rows, expected " + std::to_string(n));
  } else if (in.kind == "witness") {
    if (model.kind() != ModelKind::Line) config_error("initial = witness needs model = line");
    const double L = config.dirichlet_half_length;
    for (int j = 0; j < n; ++j) pos(0, j) = (-L + 2 * L * j / (n - 1)) / config.witness_T;
  }

  if (in.noise > 0.0) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> jitter(-in.noise, in.noise);
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < q; ++c) pos(c, j) += jitter(rng);
  }
  if (!model.is_flat()) {
    for (int j = 0; j < n; ++j) pos.col(j) = project(model, pos.col(j));
  }
  if (in.normal_offset != 0.0) {
    if (model.is_flat()) config_error("initial.normal_offset needs a curved model");
    for (int j = 0; j < n; ++j) {
      const Vec x = pos.col(j);
      pos.col(j) = x + in.normal_offset * outward_normal(model, x);
    }
  }
  return {pos, 0.0, shift};
}

FlowConfig make_flow_config(const RunConfig& config) {
  FlowConfig flow = config.flow;
  if (config.model.kind == "line") {
    const double T = config.witness_T;
    flow.dirichlet = DirichletInterval{config.dirichlet_half_length, [T](double s, double t) {
                                         Vec v(1);
                                         v(0) = s / (T - t);
                                         return v;
                                       }};
  }
  return flow;
}

}  // namespace magflow
