#include "magflow/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <unistd.h>

#include "magflow/analysis.hpp"
#include "magflow/config.hpp"
#include "magflow/exterior.hpp"
#include "magflow/oracle.hpp"
#include "magflow/presets.hpp"
#include "magflow/runner.hpp"

namespace magflow {

namespace {

// Tolerances of the acceptance criteria.
constexpr double kOracleDistance = 5e-3;
constexpr double kCentralRatio = 3.5;
constexpr double kLimitResidual = 1e-3;
constexpr double kLimitDistance = 1e-3;
constexpr double kCaseBTolerance = 1e-3;
constexpr double kEnergyHorizon = 3.0;
constexpr double kDriftFactor = 10.0;
constexpr double kBochnerRatio = 3.0;
constexpr double kBlowUpResidual = 1e-10;
constexpr double kExteriorTolerance = 1e-12;
constexpr int kExteriorInstances = 500;

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

struct Run {
  RunConfig cfg;
  ManifoldModel model;
  ForceField force;
  FlowTrajectory traj;
};

Run run_with(const KeyValues& kv) {
  RunConfig cfg = build_run_config(kv);
  const ManifoldModel model = make_model(cfg);
  const ForceField force = make_force(cfg, model);
  const LoopState init = make_initial_loop(cfg, model);
  FlowTrajectory traj = integrate(init, make_flow_config(cfg), model, force);
  return {cfg, model, force, std::move(traj)};
}

KeyValues preset_with(const std::string& name, const KeyValues& overrides) {
  KeyValues kv = overrides;
  kv["preset"] = name;
  return kv;
}

void require_completed(const FlowTrajectory& traj) {
  if (traj.status != FlowStatus::Completed) throw std::runtime_error("integration failed: " + traj.message);
}

// Analytic case-a initial data phi = A cos s, z = B sin s.
CylinderFourierState case_a_state(int n, double A, double B) {
  Eigen::VectorXd phi(n), z(n);
  for (int j = 0; j < n; ++j) {
    const double s = kTwoPi * j / n;
    phi(j) = A * std::cos(s);
    z(j) = B * std::sin(s);
  }
  return decompose(phi, z);
}

double max_node_distance(const LoopState& a, const LoopState& b) {
  return (a.positions - b.positions).colwise().norm().maxCoeff();
}

double oracle_error(const FlowTrajectory& traj, const CylinderFourierState& base, bool final_only) {
  double worst = 0.0;
  for (std::size_t i = final_only ? traj.states.size() - 1 : 0; i < traj.states.size(); ++i) {
    const LoopState& s = traj.states[i];
    worst = std::max(worst, max_node_distance(s, embed_cylinder(evolve(base, s.t), s.nodes())));
  }
  return worst;
}

double angle_difference(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d > kPi) d -= kTwoPi;
  if (d <= -kPi) d += kTwoPi;
  return d;
}

CriterionResult oracle_equivalence() {
  CriterionResult r{1, "oracle equivalence (case a)", false, "", 0};
  const auto t0 = std::chrono::steady_clock::now();
  const Run fine = run_with(preset_with("cylinder-case-a", {{"nodes", "256"}, {"t_end", "1"}, {"record_every", "500"}}));
  require_completed(fine.traj);
  const double spectral_error = oracle_error(fine.traj, case_a_state(256, 1.0, 0.5), false);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double errors[2];
  const int sizes[2] = {64, 128};
  for (int i = 0; i < 2; ++i) {
    const Run run = run_with(preset_with("cylinder-case-a", {{"nodes", std::to_string(sizes[i])},
                                                             {"scheme", "central2"},
                                                             {"t_end", "1"},
                                                             {"record_every", "100000"}}));
    require_completed(run.traj);
    errors[i] = oracle_error(run.traj, case_a_state(sizes[i], 1.0, 0.5), true);
  }
  const double ratio = errors[0] / errors[1];
  r.pass = spectral_error <= kOracleDistance && ratio >= kCentralRatio && seconds <= 10.0;
  r.detail = fmt("spectral N=256 max dist %.2e (<= 5e-3), %.1f s; ", spectral_error, seconds) +
             fmt("central2 N=64/128 error %.2e / %.2e, ratio %.2f (>= 3.5)", errors[0], errors[1], ratio);
  return r;
}

CriterionResult limit_geodesic() {
  CriterionResult r{2, "limit is a magnetic geodesic (case a)", false, "", 0};
  const Run run = run_with(preset_with("cylinder-case-a", {{"t_end", "5"}}));
  require_completed(run.traj);
  const LoopState& last = run.traj.states.back();
  const double residual =
      geodesic_residual(last, run.model, run.force, SpatialScheme::Spectral).colwise().norm().maxCoeff();
  // Limit circle xi = ((A - B) / 2) e^{-is} in (phi, z) coordinates.
  const double a = (1.0 - 0.5) / 2;
  double dist = 0.0;
  for (int j = 0; j < last.nodes(); ++j) {
    const double s = kTwoPi * j / last.nodes();
    const double phi = std::atan2(last.positions(1, j), last.positions(0, j));
    const double dphi = angle_difference(phi, a * std::cos(s));
    const double dz = last.positions(2, j) + a * std::sin(s);
    dist = std::max(dist, std::hypot(dphi, dz));
  }
  r.pass = residual <= kLimitResidual && dist <= kLimitDistance;
  r.detail = fmt("t=%.0f residual %.2e (<= 1e-3), distance to limit circle %.2e (<= 1e-3)", last.t, residual, dist);
  return r;
}

CriterionResult obstructed_limit() {
  CriterionResult r{3, "obstructed limit (case b)", false, "", 0};
  const Run run = run_with(preset_with("cylinder-case-b", {}));
  require_completed(run.traj);
  const auto& states = run.traj.states;
  const int n = run.cfg.flow.nodes;
  Eigen::VectorXd phi0(n), z0(n);
  for (int j = 0; j < n; ++j) {
    const double s = kTwoPi * j / n;
    phi0(j) = s;
    z0(j) = run.cfg.initial.mu * std::cos(s);
  }
  const CylinderFourierState base = decompose(phi0, z0);
  const SpatialOperator op(n, SpatialScheme::Spectral);

  double mean_error = 0.0, modulus_late = 0.0, modulus_all = 0.0, oracle_gap = 0.0;
  for (const LoopState& s : states) {
    const auto res = complexify(s, geodesic_residual(s, run.model, run.force, op));
    const auto exact = oracle_residual(evolve(base, s.t), n);
    Complex mean = 0.0;
    for (int j = 0; j < n; ++j) {
      mean += res[j] / static_cast<double>(n);
      const double dev = std::abs(std::abs(res[j]) - 1.0);
      modulus_all = std::max(modulus_all, dev);
      if (s.t >= kPi - 1e-9) modulus_late = std::max(modulus_late, dev);
      oracle_gap = std::max(oracle_gap, std::abs(res[j] - exact[j]));
    }
    mean_error = std::max(mean_error, std::abs(mean - Complex(0.0, 1.0)));
  }

  // Recurrence: state at t + 2 pi equals the state at t lifted by 2 pi, for t in [pi, 2 pi].
  double recurrence = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].t < kPi - 1e-9 || states[i].t > kTwoPi + 1e-9) continue;
    for (std::size_t k = i + 1; k < states.size(); ++k) {
      if (std::abs(states[k].t - states[i].t - kTwoPi) > 1e-9) continue;
      Eigen::MatrixXd lifted = states[i].positions;
      lifted.row(2).array() += kTwoPi;
      recurrence = std::max(recurrence, (states[k].positions - lifted).colwise().norm().maxCoeff());
      ++pairs;
    }
  }
  r.pass = mean_error <= kCaseBTolerance && modulus_late <= kCaseBTolerance && recurrence <= kCaseBTolerance &&
           oracle_gap <= kCaseBTolerance && pairs >= 2;
  r.detail = fmt("mean residual - i %.2e; ||r|-1| for t>=pi %.2e; recurrence %.2e", mean_error, modulus_late,
                 recurrence) +
             fmt(" over %.0f pairs; |r - oracle| %.2e; all-time ||r|-1| %.2e (info)", pairs, oracle_gap, modulus_all);
  return r;
}

CriterionResult energy_bounds() {
  CriterionResult r{4, "energy bounds on presets 1-4", false, "", 0};
  r.pass = true;
  const char* names[] = {"cylinder-case-a", "cylinder-case-b", "flat-torus-3-constant-B", "flat-torus-2-rotation"};
  for (const char* name : names) {
    const Run run = run_with(preset_with(name, {{"t_end", "3"}}));
    require_completed(run.traj);
    const EnergyReport er = energy_bound_monitor(run.traj, kEnergyHorizon);
    double e_slack = 1e300, k_slack = 1e300;
    for (const EnergyRow& row : er.rows) {
      e_slack = std::min(e_slack, row.e_bound * (1 + er.tolerance) - row.e_sup);
      k_slack = std::min(k_slack, row.kappa_bound * (1 + er.tolerance) - row.kappa_sup);
    }
    r.pass = r.pass && er.pass && !er.rows.empty();
    r.detail += std::string(r.detail.empty() ? "" : "; ") + name +
                fmt(" min margin e %.2e kappa %.2e", e_slack, k_slack);
  }
  return r;
}

CriterionResult manifold_invariance() {
  CriterionResult r{5, "manifold invariance without projection", false, "", 0};
  const KeyValues common{{"model", "cylinder"},   {"model.radius", "1"}, {"force", "radial_cross"},
                         {"initial", "case_a"},   {"projection", "never"}, {"nodes", "64"},
                         {"t_end", "1"},          {"record_every", "20"},  {"monitors", "none"}};
  const Run a = run_with(common);
  require_completed(a.traj);
  const double h = a.cfg.flow.spacing();
  const double allowance = kDriftFactor * (h * h + a.traj.dt);
  double worst = 0.0;
  for (const StateDiagnostics& d : a.traj.diagnostics) worst = std::max(worst, d.h_int);

  KeyValues off = common;
  off["initial.normal_offset"] = "0.0625";  // eps / 8 with eps = r / 2
  const Run b = run_with(off);
  require_completed(b.traj);
  const DriftReport dr = unprojected_drift_monitor(b.traj, 0.0);
  r.pass = worst <= allowance && dr.strictly_decreasing && dr.rows.size() > 2;
  r.detail = fmt("on-manifold max int h %.2e (<= %.2e); displaced: int h %.3e -> %.3e", worst, allowance,
                 dr.rows.front().h_int, dr.rows.back().h_int) +
             (dr.strictly_decreasing ? ", strictly decreasing" : ", NOT strictly decreasing");
  return r;
}

CriterionResult stability() {
  CriterionResult r{6, "stability (Gronwall shape)", false, "", 0};
  const RunConfig cfg = build_run_config({{"preset", "stability-pair"}});
  const ManifoldModel model = make_model(cfg);
  const ForceField force = make_force(cfg, model);
  const LoopState u0 = make_initial_loop(cfg, model);
  const FlowConfig flow = make_flow_config(cfg);
  LoopState v0 = u0;
  for (int j = 0; j < v0.nodes(); ++j) v0.positions(0, j) += cfg.pair.delta * std::cos(cfg.pair.mode * kTwoPi * j / v0.nodes());
  const ForceField scaled = force.scaled(cfg.pair.force_scale);

  const FlowTrajectory u = integrate(u0, flow, model, force);
  const FlowTrajectory v_init = integrate(v0, flow, model, force);
  const FlowTrajectory v_force = integrate(u0, flow, model, scaled);
  const FlowTrajectory v_same = integrate(u0, flow, model, force);
  for (const auto* t : {&u, &v_init, &v_force, &v_same}) require_completed(*t);

  const StabilityReport si = stability_compare(u, v_init, force, force, cfg.pair.t0);
  const StabilityReport sf = stability_compare(u, v_force, force, scaled, cfg.pair.t0);
  const StabilityReport ss = stability_compare(u, v_same, force, force, cfg.pair.t0);
  r.pass = si.pass && sf.pass && std::isfinite(si.C_hat) && std::isfinite(sf.C_hat) && ss.identical && ss.C_hat == 0.0;
  r.detail = fmt("initial pair C_hat %.3f, force pair C_hat %.3f, identical pair D max %.1e", si.C_hat, sf.C_hat,
                 ss.rows.empty() ? -1.0 : ss.rows.back().D);
  return r;
}

CriterionResult bochner_refinement() {
  CriterionResult r{7, "Bochner balance refinement", false, "", 0};
  const int sizes[3] = {32, 64, 128};
  const double steps[3] = {4e-3, 2e-3, 1e-3};
  const double t_mid = 0.1;
  double res[3];
  for (int i = 0; i < 3; ++i) {
    char dt[32], end[32];
    std::snprintf(dt, sizeof dt, "%.17g", steps[i]);
    std::snprintf(end, sizeof end, "%.17g", t_mid + steps[i]);
    const Run run = run_with(preset_with("flat-torus-2-rotation", {{"nodes", std::to_string(sizes[i])},
                                                                   {"dt", dt},
                                                                   {"t_end", end},
                                                                   {"time", "rk4"},
                                                                   {"record_every", "1"},
                                                                   {"monitors", "none"}}));
    require_completed(run.traj);
    const auto& s = run.traj.states;
    const std::size_t m = s.size() - 2;
    res[i] = bochner_residual(s[m - 1], s[m], s[m + 1], run.model, run.force);
  }
  const double r1 = res[0] / res[1], r2 = res[1] / res[2];
  r.pass = r1 >= kBochnerRatio && r2 >= kBochnerRatio;
  r.detail = fmt("residual %.2e -> %.2e -> %.2e", res[0], res[1], res[2]) +
             fmt(", ratios %.2f, %.2f (>= 3)", r1, r2);
  return r;
}

CriterionResult blow_up() {
  CriterionResult r{8, "blow-up witness", false, "", 0};
  std::vector<double> s_grid, t_grid;
  for (int j = 0; j <= 100; ++j) s_grid.push_back(-5.0 + 0.1 * j);
  for (int j = 0; j < 100; ++j) t_grid.push_back(0.0099 * j);
  const double residual = blow_up_residual(1.0, s_grid, t_grid);
  const Run run = run_with({{"preset", "blow-up-line"}});
  const double reached = run.traj.states.empty() ? 0.0 : run.traj.states.back().t;
  const bool raised = run.traj.status == FlowStatus::Failed && run.traj.error == ErrorKind::NonFiniteValue;
  r.pass = residual <= kBlowUpResidual && raised && reached < 1.0;
  r.detail = fmt("exact residual %.1e (<= 1e-10); line run ", residual) +
             (raised ? "raised NonFiniteValue" : "did not raise blow-up") + fmt(", last good t = %.6f", reached);
  return r;
}

CriterionResult exterior_checks() {
  CriterionResult r{9, "exterior algebra", false, "", 0};
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> qdist(1, 4);
  double tilde_err = 0.0, power_err = 0.0, norm_excess = -1e300;
  int instances = 0;
  while (instances < kExteriorInstances) {
    const int q = qdist(rng);
    const int k = std::uniform_int_distribution<int>(1, std::min(3, q))(rng);
    std::vector<Eigen::MatrixXd> maps;
    std::vector<Eigen::VectorXd> vecs;
    for (int a = 0; a < k; ++a) {
      Eigen::MatrixXd A(q, q);
      for (int i = 0; i < q * q; ++i) A.data()[i] = uni(rng);
      maps.push_back(A);
      Eigen::VectorXd v(q);
      for (int i = 0; i < q; ++i) v(i) = uni(rng);
      vecs.push_back(v);
    }
    const MultiVector xi = wedge(vecs);
    const MultiVector fast = tilde_wedge(maps).apply(xi);
    tilde_err = std::max(tilde_err, (fast.coeffs - brute_force_tilde_wedge(maps, vecs).coeffs).cwiseAbs().maxCoeff());
    const MultiLinearMap power = underlined_power(maps[0], k);
    power_err =
        std::max(power_err, (power.apply(xi).coeffs - brute_force_power(maps[0], vecs).coeffs).cwiseAbs().maxCoeff());
    MultiVector general = MultiVector::zero(q, k);
    for (int i = 0; i < general.coeffs.size(); ++i) general.coeffs(i) = uni(rng);
    const double lhs = power.apply(general).coeffs.norm();
    const double rhs = std::pow(maps[0].norm(), k) * general.coeffs.norm();
    norm_excess = std::max(norm_excess, lhs - rhs * (1 + 1e-12));
    ++instances;
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 2;
  D(1, 1) = 3;
  const double det = underlined_power(D, 2).matrix(0, 0);
  r.pass = tilde_err <= kExteriorTolerance && power_err <= kExteriorTolerance && norm_excess <= 0 &&
           std::abs(det - 6.0) <= kExteriorTolerance;
  r.detail = fmt("%.0f instances: tilde-wedge err %.1e, power err %.1e, diag(2,3) -> %.12g", instances, tilde_err,
                 power_err, det) +
             (norm_excess <= 0 ? ", norm bound holds" : ", norm bound VIOLATED");
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CriterionResult determinism() {
  CriterionResult r{10, "determinism", false, "", 0};
  const auto root = std::filesystem::temp_directory_path() / ("magflow-accept-" + std::to_string(::getpid()));
  int identical = 0, total = 0;
  std::string mismatched;
  for (const Preset& p : preset_catalog()) {
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto dir = root / std::to_string(rep) / p.name;
      run_preset(p.name, {{"t_end", "0.05"}, {"output.plots", "false"}}, dir);
      bytes[rep] = slurp(dir / "trajectory.csv");
    }
    ++total;
    if (!bytes[0].empty() && bytes[0] == bytes[1]) {
      ++identical;
    } else {
      mismatched += " " + p.name;
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(root, ec);
  r.pass = identical == total;
  r.detail = fmt("%.0f of %.0f presets byte-identical", identical, total) + mismatched;
  return r;
}

}  // namespace

CriterionResult run_criterion(int id) {
  static const std::function<CriterionResult()> table[] = {
      oracle_equivalence, limit_geodesic, obstructed_limit, energy_bounds,   manifold_invariance,
      stability,          bochner_refinement, blow_up,      exterior_checks, determinism};
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  if (id < 1 || id > kCriterionCount) {
    r.id = id;
    r.name = "unknown criterion";
    r.detail = "no such criterion";
    return r;
  }
  try {
    r = table[id - 1]();
  } catch (const std::exception& e) {
    static const char* names[] = {"oracle equivalence (case a)", "limit is a magnetic geodesic (case a)",
                                  "obstructed limit (case b)",   "energy bounds on presets 1-4",
                                  "manifold invariance without projection", "stability (Gronwall shape)",
                                  "Bochner balance refinement",  "blow-up witness",
                                  "exterior algebra",            "determinism"};
    r.id = id;
    r.name = names[id - 1];
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_acceptance_suite() {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) out.push_back(run_criterion(id));
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d  %-40s ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
  char tail[32];
  std::snprintf(tail, sizeof tail, " (%.1f s)", r.seconds);
  return head + r.detail + tail;
}

}  // namespace magflow
