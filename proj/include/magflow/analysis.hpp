#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "magflow/flow.hpp"

namespace magflow {

/// e_j = |u'_j|^2 / 2.
Eigen::VectorXd energy_density(const LoopState& state, const SpatialOperator& op);
Eigen::VectorXd energy_density(const LoopState& state, SpatialScheme scheme = SpatialScheme::Central2);

/// kappa_j = |F_j|^2 / 2 for velocities F (the rhs).
Eigen::VectorXd kinetic_density(const Eigen::MatrixXd& rhs_values);

/// r_j = P(Laplacian u_j - Pi(du_j, du_j)) - Z(du_j): the magnetic-geodesic
/// residual of a loop. Throws UnsupportedDomain for forces of degree >= 2.
Eigen::MatrixXd geodesic_residual(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                                  const SpatialOperator& op);
Eigen::MatrixXd geodesic_residual(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                                  SpatialScheme scheme = SpatialScheme::Central2);

/// A map from the square flat torus (n x n grid, spacing 2 pi / n) into a flat
/// target. Column i + n*j of `values` is u(x_i, y_j); crossing the grid in x
/// (resp. y) adds shift_x (resp. shift_y).
struct GridMap {
  int n = 0;
  Eigen::MatrixXd values;
  Eigen::VectorXd shift_x, shift_y;
};

/// Residual Laplacian u - Z(u_x ^ u_y) of the degree-2 equation on a flat
/// square torus, second-order differences. Requires a flat target and a
/// degree-2 force.
Eigen::MatrixXd geodesic_residual_grid(const GridMap& map, const ManifoldModel& model, const ForceField& force);

StateDiagnostics compute_diagnostics(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                                     const SpatialOperator& op);

struct EnergyRow {
  double t = 0.0;
  double e_sup = 0.0;
  double E = 0.0;
  double kappa_sup = 0.0;
  double K = 0.0;
  double e_bound = 0.0;    ///< e^{lambda t} max e(f)
  double e_bound_T = 0.0;  ///< e^{lambda T} max e(f), the weaker form
  double kappa_bound = 0.0;
  double e_margin = 0.0;
  double kappa_margin = 0.0;
  bool pass = true;
};

struct EnergyReport {
  double lambda = 0.0;
  double mu = 0.0;
  double C = 0.0;
  double curvature_sup = 0.0;
  double T = 0.0;
  double tolerance = 0.0;  ///< relative slack 1e-6 + 10 h^2
  bool norms_estimated = false;
  std::vector<EnergyRow> rows;
  bool pass = true;
};

/// Maximum-principle bounds for e and kappa along a trajectory, up to time
/// t_max (default: the whole trajectory). Throws MissingNormConstants if the
/// force norms are not finite.
EnergyReport energy_bound_monitor(const FlowTrajectory& trajectory,
                                  std::optional<double> t_max = std::nullopt);

/// max_j |d_t e - Laplacian e + |u''|^2 - <Z(u'), u''>| at the middle of three
/// consecutive states, with d_t e by central difference. Flat targets with a
/// parallel force only (UnsupportedModel otherwise).
double bochner_residual(const LoopState& prev, const LoopState& mid, const LoopState& next,
                        const ManifoldModel& model, const ForceField& force);

struct StabilityRow {
  double t = 0.0;
  double D = 0.0;
  double bound = 0.0;  ///< 2 pi e^{C t} (|u0 - v0|^2 + t |Z - Z'|^2) with the fitted C
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double D0 = 0.0;
  double initial_sup2 = 0.0;  ///< |u0 - v0|^2 in sup norm
  double mismatch = 0.0;      ///< |Z - Z'|^2 in sup norm
  double C_hat = 0.0;
  std::optional<double> growth_rate;  ///< sup (ln D(t) - ln D(0)) / t, when D(0) > 0
  double t_min = 0.05;
  double T0 = 1.0;
  bool identical = false;  ///< D vanished identically
  bool pass = false;
};

/// Fits the Gronwall shape D(t) <= 2 pi e^{C t}(|u0 - v0|^2 + t |Z - Z'|^2) on [t_min, T0].
StabilityReport stability_compare(const FlowTrajectory& u, const FlowTrajectory& v, const ForceField& Z,
                                  const ForceField& Z_prime, double T0, double t_min = 0.05);

struct DriftRow {
  double t = 0.0;
  double h_sup = 0.0;
  double h_int = 0.0;
};

struct DriftReport {
  std::vector<DriftRow> rows;
  double allowance = 0.0;
  double max_increase = 0.0;     ///< largest step-to-step growth of the integral of h
  bool non_increasing = true;    ///< no growth beyond the allowance
  bool strictly_decreasing = true;
};

/// Normal drift of an unprojected run. Throws WrongMode for projected runs.
DriftReport unprojected_drift_monitor(const FlowTrajectory& trajectory, double allowance);

}  // namespace magflow
