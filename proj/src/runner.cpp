#include "magflow/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "magflow/analysis.hpp"
#include "magflow/errors.hpp"
#include "magflow/io.hpp"
#include "magflow/oracle.hpp"

namespace magflow {

namespace {

using nlohmann::json;

const char* status_name(FlowStatus s) { return s == FlowStatus::Completed ? "completed" : "failed"; }

json energy_json(const EnergyReport& r) {
  json rows = json::array();
  for (const EnergyRow& row : r.rows) {
    rows.push_back({{"t", row.t},
                    {"e_sup", {{"observed", row.e_sup}, {"bound", row.e_bound}, {"margin", row.e_margin}}},
                    {"e_bound_T", row.e_bound_T},
                    {"kappa_sup", {{"observed", row.kappa_sup}, {"bound", row.kappa_bound}, {"margin", row.kappa_margin}}},
                    {"E", row.E},
                    {"K", row.K},
                    {"pass", row.pass}});
  }
  return {{"lambda", r.lambda}, {"mu", r.mu},         {"C", r.C},
          {"curvature_sup", r.curvature_sup},         {"T", r.T},
          {"tolerance", r.tolerance},                 {"norms_estimated", r.norms_estimated},
          {"rows", rows},                             {"pass", r.pass}};
}

json residual_json(const FlowTrajectory& traj) {
  json rows = json::array();
  for (const StateDiagnostics& d : traj.diagnostics) rows.push_back({{"t", d.t}, {"sup", d.residual_sup}});
  const double last = traj.diagnostics.empty() ? 0.0 : traj.diagnostics.back().residual_sup;
  return {{"rows", rows},
          {"final_sup", last},
          {"tolerance", traj.config.residual_tolerance},
          {"below_tolerance", last <= traj.config.residual_tolerance}};
}

json drift_json(const DriftReport& r) {
  json rows = json::array();
  for (const DriftRow& row : r.rows) rows.push_back({{"t", row.t}, {"h_sup", row.h_sup}, {"h_int", row.h_int}});
  return {{"rows", rows},
          {"allowance", r.allowance},
          {"max_increase", r.max_increase},
          {"non_increasing", r.non_increasing},
          {"strictly_decreasing", r.strictly_decreasing},
          {"pass", r.non_increasing}};
}

json stability_json(const StabilityReport& r) {
  json rows = json::array();
  for (const StabilityRow& row : r.rows)
    rows.push_back({{"t", row.t}, {"observed", row.D}, {"bound", row.bound}, {"margin", row.bound - row.D}});
  json out{{"rows", rows},
           {"D0", r.D0},
           {"initial_sup2", r.initial_sup2},
           {"force_mismatch_sup2", r.mismatch},
           {"C_hat", r.C_hat},
           {"t_min", r.t_min},
           {"T0", r.T0},
           {"identical", r.identical},
           {"pass", r.pass}};
  out["growth_rate"] = r.growth_rate ? json(*r.growth_rate) : json(nullptr);
  return out;
}

json run_json(const RunConfig& cfg, const FlowTrajectory& traj) {
  json out{{"preset", cfg.preset},
           {"experiment", cfg.experiment},
           {"model", traj.model.name()},
           {"force", traj.force.name()},
           {"nodes", traj.config.nodes},
           {"dt", traj.dt},
           {"t_end", traj.config.t_end},
           {"steps", traj.config.step_count()},
           {"scheme", traj.config.spatial == SpatialScheme::Spectral ? "spectral" : "central2"},
           {"time", traj.config.time == TimeScheme::RK4 ? "rk4" : "euler"},
           {"projection", traj.config.projection == ProjectionMode::Never ? "never" : "every_step"},
           {"recorded_states", traj.states.size()},
           {"status", status_name(traj.status)},
           {"message", traj.message}};
  out["error"] = traj.error ? json(to_string(*traj.error)) : json(nullptr);
  out["t_reached"] = traj.states.empty() ? 0.0 : traj.states.back().t;
  return out;
}

// Unwrapped angle of a cylinder loop.
Eigen::VectorXd unwrapped_phi(const LoopState& s) {
  Eigen::VectorXd phi(s.nodes());
  for (int j = 0; j < s.nodes(); ++j) {
    phi(j) = std::atan2(s.positions(1, j), s.positions(0, j));
    if (j > 0) phi(j) -= kTwoPi * std::round((phi(j) - phi(j - 1)) / kTwoPi);
  }
  return phi;
}

struct OracleOutcome {
  json report;
  std::vector<LoopState> states;
  std::vector<StateDiagnostics> diagnostics;
};

OracleOutcome oracle_comparison(const FlowTrajectory& traj, const SpatialOperator& op) {
  OracleOutcome out;
  const LoopState& first = traj.states.front();
  const CylinderFourierState base = decompose(unwrapped_phi(first), first.positions.row(2).transpose());
  json rows = json::array();
  double worst = 0.0;
  for (const LoopState& s : traj.states) {
    LoopState exact = embed_cylinder(evolve(base, s.t - first.t), s.nodes());
    const double dist = (exact.positions - s.positions).colwise().norm().maxCoeff();
    worst = std::max(worst, dist);
    rows.push_back({{"t", s.t}, {"max_distance", dist}});
    out.diagnostics.push_back(compute_diagnostics(exact, traj.model, traj.force, op));
    out.states.push_back(std::move(exact));
  }
  out.report = {{"winding", base.winding}, {"rows", rows}, {"max_distance", worst}};
  return out;
}

void write_plots(const std::filesystem::path& dir, const FlowTrajectory& traj, const std::string& title,
                 std::vector<SvgSeries> extra = {}) {
  write_text(dir / "loop.svg", loop_svg(traj.states, traj.model, title));
  SvgSeries e{"e_sup", {}, {}}, r{"residual sup", {}, {}};
  for (const StateDiagnostics& d : traj.diagnostics) {
    e.t.push_back(d.t);
    e.values.push_back(d.e_sup);
    r.t.push_back(d.t);
    r.values.push_back(d.residual_sup);
  }
  std::vector<SvgSeries> series{e, r};
  for (auto& s : extra) series.push_back(std::move(s));
  write_text(dir / "timeseries.svg", timeseries_svg(series, title));
}

std::string describe(const RunConfig& cfg) { return cfg.preset.empty() ? std::string("run") : cfg.preset; }

struct Monitored {
  json report;
  bool violation = false;
  std::vector<std::string> notes;
};

// Energy, residual and drift sections for one trajectory.
Monitored apply_monitors(const RunConfig& cfg, const FlowTrajectory& traj) {
  Monitored m;
  if (cfg.monitors.count("energy")) {
    const EnergyReport er = energy_bound_monitor(traj);
    m.report["energy"] = energy_json(er);
    if (!er.pass) {
      m.violation = true;
      m.notes.push_back("energy bound violated");
    }
    if (er.norms_estimated) m.notes.push_back("warning: force norms are sampled estimates");
  }
  if (cfg.monitors.count("residual")) m.report["residual"] = residual_json(traj);
  if (cfg.monitors.count("drift")) {
    const double h = traj.config.spacing();
    const DriftReport dr = unprojected_drift_monitor(traj, cfg.flow.drift_tolerance + 10 * (h * h + traj.dt));
    m.report["drift"] = drift_json(dr);
    if (!dr.non_increasing) {
      m.violation = true;
      m.notes.push_back("normal drift increased");
    }
  }
  return m;
}

RunResult single_run(const RunConfig& cfg, const ManifoldModel& model, const ForceField& force,
                     const LoopState& initial) {
  RunResult result;
  result.output_dir = cfg.output_dir;
  const FlowConfig flow = make_flow_config(cfg);
  const FlowTrajectory traj = integrate(initial, flow, model, force);
  json& report = result.report;
  report["run"] = run_json(cfg, traj);
  report["config"] = cfg.resolved;
  json warnings = json::array();
  if (force.kind() == ForceKind::Custom) {
    warnings.push_back("custom force: skew-symmetry is enforced but closedness of the associated form is only sampled");
  }

  Monitored m = apply_monitors(cfg, traj);
  for (auto& [k, v] : m.report.items()) report[k] = v;

  std::optional<OracleOutcome> oracle;
  const std::string& init = cfg.initial.kind;
  if ((init == "case_a" || init == "case_b") && model.radius() == 1.0 && !traj.states.empty()) {
    try {
      const SpatialOperator op(flow.nodes, flow.spatial);
      oracle = oracle_comparison(traj, op);
      report["oracle"] = oracle->report;
    } catch (const Error& e) {
      warnings.push_back(std::string("oracle comparison skipped: ") + e.what());
    }
  }

  int code = kExitOk;
  std::string summary;
  if (traj.status == FlowStatus::Failed) {
    const bool expected = cfg.expect == "blowup" && traj.error == ErrorKind::NonFiniteValue;
    code = expected ? kExitOk : kExitIntegratorError;
    summary = (expected ? "blow-up detected as expected: " : "integrator error: ") + traj.message;
  } else if (cfg.expect == "blowup") {
    code = kExitMonitorViolation;
    summary = "expected blow-up did not occur before t_end";
  } else {
    summary = "completed at t = " + std::to_string(traj.states.back().t);
  }
  if (m.violation && code == kExitOk) code = kExitMonitorViolation;
  for (const auto& n : m.notes) {
    if (n.rfind("warning: ", 0) == 0) {
      warnings.push_back(n.substr(9));
    } else {
      summary += "; " + n;
    }
  }
  report["warnings"] = warnings;
  report["exit_code"] = code;
  result.exit_code = code;
  result.summary = describe(cfg) + ": " + summary;

  if (!cfg.output_dir.empty()) {
    write_trajectory_csv(cfg.output_dir / "trajectory.csv", traj.states, traj.diagnostics);
    if (oracle) write_trajectory_csv(cfg.output_dir / "oracle.csv", oracle->states, oracle->diagnostics, "oracle");
    if (cfg.plots && !traj.states.empty()) write_plots(cfg.output_dir, traj, describe(cfg));
  }
  return result;
}

RunResult stability_pair_run(const RunConfig& cfg, const ManifoldModel& model, const ForceField& force,
                             const LoopState& initial) {
  RunResult result;
  result.output_dir = cfg.output_dir;
  const FlowConfig flow = make_flow_config(cfg);
  LoopState perturbed = initial;
  for (int j = 0; j < perturbed.nodes(); ++j) {
    perturbed.positions(0, j) += cfg.pair.delta * std::cos(cfg.pair.mode * kTwoPi * j / perturbed.nodes());
    if (!model.is_flat()) perturbed.positions.col(j) = project(model, perturbed.positions.col(j));
  }
  const ForceField scaled = force.scaled(cfg.pair.force_scale);

  const FlowTrajectory base = integrate(initial, flow, model, force);
  struct Pair {
    std::string name;
    FlowTrajectory other;
    const ForceField* force;
  };
  std::vector<Pair> pairs;
  pairs.push_back({"initial", integrate(perturbed, flow, model, force), &force});
  pairs.push_back({"force", integrate(initial, flow, model, scaled), &scaled});
  pairs.push_back({"identical", integrate(initial, flow, model, force), &force});

  json& report = result.report;
  report["run"] = run_json(cfg, base);
  report["config"] = cfg.resolved;
  Monitored m = apply_monitors(cfg, base);
  for (auto& [k, v] : m.report.items()) report[k] = v;

  int code = kExitOk;
  std::string summary = "stability pairs";
  bool failed = base.status == FlowStatus::Failed;
  for (const Pair& p : pairs) failed = failed || p.other.status == FlowStatus::Failed;
  std::vector<SvgSeries> d_series;
  json stability = json::object();
  if (failed) {
    code = kExitIntegratorError;
    summary += ": integrator error";
  } else {
    bool pass = true;
    for (const Pair& p : pairs) {
      const StabilityReport sr = stability_compare(base, p.other, force, *p.force, cfg.pair.t0);
      stability[p.name] = stability_json(sr);
      pass = pass && sr.pass;
      if (p.name == "identical" && !sr.identical) pass = false;
      SvgSeries s{"D(t) " + p.name, {}, {}};
      for (const StabilityRow& row : sr.rows) {
        s.t.push_back(row.t);
        s.values.push_back(row.D);
      }
      d_series.push_back(std::move(s));
    }
    stability["pass"] = pass;
    if (!pass) {
      code = kExitMonitorViolation;
      summary += ": Gronwall shape violated";
    } else {
      summary += ": Gronwall shape holds";
    }
  }
  report["stability"] = stability;
  if (m.violation && code == kExitOk) code = kExitMonitorViolation;
  json warnings = json::array();
  for (const auto& n : m.notes) {
    if (n.rfind("warning: ", 0) == 0) {
      warnings.push_back(n.substr(9));
    } else {
      summary += "; " + n;
    }
  }
  report["warnings"] = warnings;
  report["exit_code"] = code;
  result.exit_code = code;
  result.summary = describe(cfg) + ": " + summary;

  if (!cfg.output_dir.empty()) {
    write_trajectory_csv(cfg.output_dir / "trajectory.csv", base.states, base.diagnostics);
    for (const Pair& p : pairs)
      write_trajectory_csv(cfg.output_dir / ("pair_" + p.name + ".csv"), p.other.states, p.other.diagnostics,
                           p.name);
    if (cfg.plots && !base.states.empty()) write_plots(cfg.output_dir, base, describe(cfg), d_series);
  }
  return result;
}

RunResult config_failure(const std::string& what, const std::filesystem::path& dir = {}) {
  RunResult r;
  r.exit_code = kExitConfigError;
  r.summary = "config error: " + what;
  r.output_dir = dir;
  r.report = {{"error", what}, {"exit_code", kExitConfigError}};
  return r;
}

}  // namespace

RunResult run_experiment(const RunConfig& config) {
  try {
    if (config.monitors.count("drift") && config.flow.projection != ProjectionMode::Never) {
      throw Error(ErrorKind::ConfigError, "monitors = drift needs projection = never");
    }
    if (!config.output_dir.empty()) std::filesystem::create_directories(config.output_dir);
    const ManifoldModel model = make_model(config);
    const ForceField force = make_force(config, model);
    const LoopState initial = make_initial_loop(config, model);
    RunResult r = config.experiment == "stability_pair" ? stability_pair_run(config, model, force, initial)
                                                        : single_run(config, model, force, initial);
    if (!config.output_dir.empty()) write_text(config.output_dir / "report.json", r.report.dump(2) + "\n");
    return r;
  } catch (const std::exception& e) {
    RunResult r = config_failure(e.what(), config.output_dir);
    r.summary = describe(config) + ": " + r.summary;
    if (!config.output_dir.empty()) {
      try {
        write_text(config.output_dir / "report.json", r.report.dump(2) + "\n");
      } catch (const std::exception&) {
      }
    }
    return r;
  }
}

RunResult run_config_file(const std::filesystem::path& path, const std::filesystem::path& output_override) {
  RunConfig cfg;
  try {
    cfg = load_run_config(path);
  } catch (const std::exception& e) {
    return config_failure(e.what());
  }
  if (!output_override.empty()) {
    cfg.output_dir = output_override;
  } else if (cfg.output_dir.empty()) {
    cfg.output_dir = cfg.base_dir / (path.stem().string() + ".out");
  }
  return run_experiment(cfg);
}

RunResult run_preset(const std::string& name, const KeyValues& overrides,
                     const std::filesystem::path& output_override) {
  KeyValues kv = overrides;
  kv["preset"] = name;
  RunConfig cfg;
  try {
    cfg = build_run_config(kv);
  } catch (const std::exception& e) {
    return config_failure(e.what());
  }
  if (!output_override.empty()) {
    cfg.output_dir = output_override;
  } else if (cfg.output_dir.empty()) {
    cfg.output_dir = name + ".out";
  }
  return run_experiment(cfg);
}

std::vector<RunResult> run_sweep(const std::filesystem::path& dir, unsigned threads) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::ConfigError, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<RunResult> results(files.size());
  std::vector<std::optional<RunConfig>> configs(files.size());
  std::map<std::filesystem::path, std::filesystem::path> owners;
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      RunConfig cfg = load_run_config(files[i]);
      if (cfg.output_dir.empty()) cfg.output_dir = dir / (files[i].stem().string() + ".out");
      const auto key = std::filesystem::weakly_canonical(cfg.output_dir);
      if (const auto it = owners.find(key); it != owners.end()) {
        throw Error(ErrorKind::ConfigError, files[i].filename().string() + " and " + it->second.filename().string() +
                                                " share the output directory " + cfg.output_dir.string());
      }
      owners[key] = files[i];
      configs[i] = std::move(cfg);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError && std::string(e.what()).find("share the output") != std::string::npos) {
        throw;
      }
      results[i] = config_failure(files[i].filename().string() + ": " + e.what());
    }
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, files.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      if (!configs[i]) continue;
      results[i] = run_experiment(*configs[i]);
      results[i].summary = files[i].filename().string() + ": " + results[i].summary;
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

KeyValues parse_overrides(const std::vector<std::string>& items) {
  std::string text;
  for (const auto& item : items) text += item + "\n";
  return parse_key_values(text, "--set");
}

}  // namespace magflow
