#include "magflow/analysis.hpp"

#include <cmath>
#include <limits>

namespace magflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd residual_from(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                              const SpatialOperator& op, const Derivatives& d) {
  if (force.degree() >= 2) {
    throw Error(ErrorKind::UnsupportedDomain, "loops carry 1-forces; use the grid residual for higher degree");
  }
  const int n = state.nodes();
  Eigen::MatrixXd r(state.dim(), n);
  for (int j = 0; j < n; ++j) {
    const Vec x = state.node(j);
    const Vec du = d.first.col(j);
    const Vec tension = tangent_project(model, x, Vec(d.second.col(j)) - second_fundamental_correction(model, x, du));
    r.col(j) = tension - force.apply(x, du);
  }
  if (op.dirichlet()) {
    r.col(0).setZero();
    r.col(n - 1).setZero();
  }
  return r;
}

}  // namespace

Eigen::VectorXd energy_density(const LoopState& state, const SpatialOperator& op) {
  return 0.5 * op.apply(state).first.colwise().squaredNorm().transpose();
}

Eigen::VectorXd energy_density(const LoopState& state, SpatialScheme scheme) {
  return energy_density(state, SpatialOperator(state.nodes(), scheme));
}

Eigen::VectorXd kinetic_density(const Eigen::MatrixXd& rhs_values) {
  return 0.5 * rhs_values.colwise().squaredNorm().transpose();
}

Eigen::MatrixXd geodesic_residual(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                                  const SpatialOperator& op) {
  return residual_from(state, model, force, op, op.apply(state));
}

Eigen::MatrixXd geodesic_residual(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                                  SpatialScheme scheme) {
  return geodesic_residual(state, model, force, SpatialOperator(state.nodes(), scheme));
}

Eigen::MatrixXd geodesic_residual_grid(const GridMap& map, const ManifoldModel& model, const ForceField& force) {
  if (!model.is_flat()) throw Error(ErrorKind::UnsupportedDomain, "grid residual needs a flat target");
  if (force.degree() != 2) throw Error(ErrorKind::DegreeMismatch, "grid residual needs a 2-force");
  const int n = map.n;
  const int q = model.ambient_dim();
  if (map.values.rows() != q || map.values.cols() != n * n) {
    throw Error(ErrorKind::DimensionMismatch, "grid values have the wrong shape");
  }
  const Eigen::VectorXd sx = map.shift_x.size() == q ? map.shift_x : Eigen::VectorXd::Zero(q);
  const Eigen::VectorXd sy = map.shift_y.size() == q ? map.shift_y : Eigen::VectorXd::Zero(q);
  const double h = kTwoPi / n;
  auto at = [&](int i, int j) -> Eigen::VectorXd {
    Eigen::VectorXd v = map.values.col(((i % n + n) % n) + n * ((j % n + n) % n));
    v += sx * std::floor(static_cast<double>(i) / n) + sy * std::floor(static_cast<double>(j) / n);
    return v;
  };
  Eigen::MatrixXd r(q, n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd c = at(i, j);
      const Eigen::VectorXd ux = (at(i + 1, j) - at(i - 1, j)) / (2 * h);
      const Eigen::VectorXd uy = (at(i, j + 1) - at(i, j - 1)) / (2 * h);
      const Eigen::VectorXd lap = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4 * c) / (h * h);
      r.col(i + n * j) = lap - Eigen::VectorXd(evaluate(force, Vec(c), wedge({ux, uy})));
    }
  }
  return r;
}

StateDiagnostics compute_diagnostics(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                                     const SpatialOperator& op) {
  const Derivatives d = op.apply(state);
  StateDiagnostics out;
  out.t = state.t;
  out.e = 0.5 * d.first.colwise().squaredNorm().transpose();
  out.kappa = kinetic_density(rhs(state, model, force, op));
  out.residual = residual_from(state, model, force, op, d).colwise().norm().transpose();
  out.h.resize(state.nodes());
  for (int j = 0; j < state.nodes(); ++j) {
    const double dist = distance_to_manifold(model, state.node(j));
    out.h(j) = dist * dist;
  }
  out.e_sup = out.e.maxCoeff();
  out.E = op.integrate(out.e);
  out.kappa_sup = out.kappa.maxCoeff();
  out.K = op.integrate(out.kappa);
  out.residual_sup = out.residual.maxCoeff();
  out.h_sup = out.h.maxCoeff();
  out.h_int = op.integrate(out.h);
  return out;
}

EnergyReport energy_bound_monitor(const FlowTrajectory& trajectory, std::optional<double> t_max) {
  const NormConstants& norms = trajectory.force.norms();
  if (!std::isfinite(norms.sup) || !std::isfinite(norms.grad_sup)) {
    throw Error(ErrorKind::MissingNormConstants, "force " + trajectory.force.name() + " has no finite sup norms");
  }
  EnergyReport report;
  if (trajectory.diagnostics.empty()) return report;
  const double h = trajectory.config.spacing();
  report.lambda = 0.5 * norms.sup * norms.sup;
  report.mu = std::pow(2.0, 1.5) * norms.grad_sup;
  report.curvature_sup = trajectory.model.curvature_sup();
  report.norms_estimated = norms.estimated;
  report.T = t_max ? *t_max : trajectory.diagnostics.back().t;
  report.tolerance = 1e-6 + 10 * h * h;

  const double t0 = trajectory.diagnostics.front().t;
  const double e0 = trajectory.diagnostics.front().e_sup;
  const double k0 = trajectory.diagnostics.front().kappa_sup;
  const double growth = std::exp(report.lambda * (report.T - t0));
  report.C = 4 * report.curvature_sup * growth * e0 + report.lambda +
             report.mu * std::sqrt(growth) * std::sqrt(e0);

  for (const StateDiagnostics& d : trajectory.diagnostics) {
    if (d.t > report.T + 1e-12) break;
    EnergyRow row;
    const double s = d.t - t0;
    row.t = d.t;
    row.e_sup = d.e_sup;
    row.E = d.E;
    row.kappa_sup = d.kappa_sup;
    row.K = d.K;
    row.e_bound = std::exp(report.lambda * s) * e0;
    row.e_bound_T = growth * e0;
    row.kappa_bound = std::exp(report.C * s) * k0;
    row.e_margin = row.e_bound - row.e_sup;
    row.kappa_margin = row.kappa_bound - row.kappa_sup;
    // A tiny absolute floor keeps exactly stationary data (bound 0) from
    // failing on roundoff.
    row.pass = row.e_sup <= row.e_bound * (1 + report.tolerance) + 1e-14 &&
               row.kappa_sup <= row.kappa_bound * (1 + report.tolerance) + 1e-14;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

double bochner_residual(const LoopState& prev, const LoopState& mid, const LoopState& next,
                        const ManifoldModel& model, const ForceField& force) {
  if (!model.is_flat()) {
    throw Error(ErrorKind::UnsupportedModel, "Bochner balance implemented for flat targets only");
  }
  if (force.kind() == ForceKind::Custom || force.kind() == ForceKind::LinearScalar) {
    throw Error(ErrorKind::UnsupportedModel, "Bochner balance needs a parallel force");
  }
  if (prev.nodes() != mid.nodes() || next.nodes() != mid.nodes()) {
    throw Error(ErrorKind::GridMismatch, "window states differ in node count");
  }
  const SpatialOperator op(mid.nodes(), SpatialScheme::Central2);
  const Eigen::VectorXd e_prev = energy_density(prev, op);
  const Eigen::VectorXd e_next = energy_density(next, op);
  const Derivatives d = op.apply(mid);
  const Eigen::VectorXd e = 0.5 * d.first.colwise().squaredNorm().transpose();
  const Eigen::VectorXd de_dt = (e_next - e_prev) / (next.t - prev.t);
  const Eigen::VectorXd lap_e = op.second_derivative_scalar(e);
  double worst = 0.0;
  for (int j = 0; j < mid.nodes(); ++j) {
    const Vec du = d.first.col(j);
    const Vec ddu = d.second.col(j);
    const double balance = de_dt(j) - lap_e(j) + ddu.squaredNorm() - force.apply(mid.node(j), du).dot(ddu);
    worst = std::max(worst, std::abs(balance));
  }
  return worst;
}

StabilityReport stability_compare(const FlowTrajectory& u, const FlowTrajectory& v, const ForceField& Z,
                                  const ForceField& Z_prime, double T0, double t_min) {
  if (u.states.size() != v.states.size() || u.states.empty()) {
    throw Error(ErrorKind::GridMismatch, "trajectories record different numbers of states");
  }
  StabilityReport report;
  report.T0 = T0;
  report.t_min = t_min;
  const int n = u.states.front().nodes();
  const double h = kTwoPi / n;
  for (std::size_t i = 0; i < u.states.size(); ++i) {
    const LoopState& a = u.states[i];
    const LoopState& b = v.states[i];
    if (a.nodes() != b.nodes() || a.nodes() != n || std::abs(a.t - b.t) > 1e-12) {
      throw Error(ErrorKind::GridMismatch, "trajectories differ in nodes or recording times");
    }
    if (a.t > T0 + 1e-12) break;
    report.rows.push_back({a.t, h * (a.positions - b.positions).colwise().squaredNorm().sum(), 0.0});
  }
  const auto& u0 = u.states.front().positions;
  const auto& v0 = v.states.front().positions;
  report.D0 = report.rows.front().D;
  report.initial_sup2 = (u0 - v0).colwise().squaredNorm().maxCoeff();
  const double diff = sup_difference(Z, Z_prime);
  report.mismatch = diff * diff;

  report.identical = true;
  for (const auto& row : report.rows) report.identical = report.identical && row.D == 0.0;

  double c_hat = 0.0;
  std::optional<double> growth;
  if (report.D0 > 0) growth = 0.0;
  bool window_seen = false;
  for (const auto& row : report.rows) {
    if (row.t < t_min - 1e-12) continue;
    window_seen = true;
    if (row.D == 0.0) continue;
    const double reference = kTwoPi * (report.initial_sup2 + row.t * report.mismatch);
    c_hat = reference > 0 ? std::max(c_hat, std::log(row.D / reference) / row.t) : kInf;
    if (growth) growth = std::max(*growth, (std::log(row.D) - std::log(report.D0)) / row.t);
  }
  report.C_hat = c_hat;
  report.growth_rate = growth;

  bool holds = window_seen && std::isfinite(c_hat);
  for (auto& row : report.rows) {
    row.bound = kTwoPi * std::exp(c_hat * row.t) * (report.initial_sup2 + row.t * report.mismatch);
    if (row.t >= t_min - 1e-12) holds = holds && row.D <= row.bound * (1 + 1e-12);
  }
  report.pass = report.identical ? true : holds;
  return report;
}

DriftReport unprojected_drift_monitor(const FlowTrajectory& trajectory, double allowance) {
  if (trajectory.config.projection != ProjectionMode::Never) {
    throw Error(ErrorKind::WrongMode, "drift monitor needs a run without projection");
  }
  DriftReport report;
  report.allowance = allowance;
  for (const StateDiagnostics& d : trajectory.diagnostics) report.rows.push_back({d.t, d.h_sup, d.h_int});
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const double increase = report.rows[i].h_int - report.rows[i - 1].h_int;
    report.max_increase = i == 1 ? increase : std::max(report.max_increase, increase);
    report.non_increasing = report.non_increasing && increase <= allowance;
    report.strictly_decreasing = report.strictly_decreasing && increase < 0;
  }
  return report;
}

}  // namespace magflow
