#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magflow/errors.hpp"
#include "magflow/force.hpp"
#include "magflow/geometry.hpp"

namespace magflow {

class SpectralDifferentiator;

enum class ProjectionMode { EveryStep, Never };
enum class SpatialScheme { Central2, Spectral };
enum class TimeScheme { Euler, RK4 };

/// Discretized loop: column j of `positions` is u(s_j, t) with s_j = 2 pi j / N.
/// On the flat torus loops are kept on the universal cover, so a loop that
/// winds around satisfies u_{j+N} = u_j + period_shift.
struct LoopState {
  Eigen::MatrixXd positions;
  double t = 0.0;
  Eigen::VectorXd period_shift;

  int nodes() const { return static_cast<int>(positions.cols()); }
  int dim() const { return static_cast<int>(positions.rows()); }
  Vec node(int j) const { return positions.col(j); }

  static LoopState from_nodes(const Eigen::MatrixXd& positions, double t = 0.0);
};

/// Truncation of a non-compact domain to [-L, L] with prescribed boundary
/// values. Nodes are then s_j = -L + j h with h = 2L / (N - 1), endpoints included.
struct DirichletInterval {
  double half_length = 1.0;
  std::function<Vec(double s, double t)> boundary;
};

struct FlowConfig {
  int nodes = 64;
  std::optional<double> dt;  ///< empty means auto: 0.5 * h^2 / 2
  double t_end = 1.0;
  ProjectionMode projection = ProjectionMode::EveryStep;
  SpatialScheme spatial = SpatialScheme::Central2;
  TimeScheme time = TimeScheme::Euler;
  int record_every = 1;
  double drift_tolerance = 1e-12;
  double residual_tolerance = 1e-3;
  /// Numerical blow-up once sup|u| exceeds this factor times max(1, sup|u_0|).
  double blowup_factor = 1e3;
  std::optional<DirichletInterval> dirichlet;

  double spacing() const;
  /// Step actually taken: the requested (or auto) dt shrunk so that t_end is hit exactly.
  double effective_dt() const;
  long step_count() const;
};

/// Per-node and aggregated diagnostics of one recorded state.
struct StateDiagnostics {
  double t = 0.0;
  double e_sup = 0.0;
  double E = 0.0;
  double kappa_sup = 0.0;
  double K = 0.0;
  double residual_sup = 0.0;
  double h_sup = 0.0;
  double h_int = 0.0;
  Eigen::VectorXd e, kappa, residual, h;
};

enum class FlowStatus { Completed, Failed };

struct FlowTrajectory {
  std::vector<LoopState> states;
  std::vector<StateDiagnostics> diagnostics;
  FlowStatus status = FlowStatus::Completed;
  std::optional<ErrorKind> error;
  std::string message;
  FlowConfig config;
  ManifoldModel model;
  ForceField force;
  double dt = 0.0;
};

struct Derivatives {
  Eigen::MatrixXd first;   ///< du, q x N
  Eigen::MatrixXd second;  ///< Laplacian of u, q x N
};

/// Spatial differencing for one node count and scheme. Holds FFT plans, so
/// one instance per thread.
class SpatialOperator {
 public:
  SpatialOperator(int nodes, SpatialScheme scheme, std::optional<double> dirichlet_half_length = {});
  ~SpatialOperator();
  SpatialOperator(SpatialOperator&&) noexcept;

  Derivatives apply(const LoopState& state) const;
  /// Second-order periodic (or interval) derivatives of a scalar field on the grid.
  Eigen::VectorXd second_derivative_scalar(const Eigen::VectorXd& f) const;
  double spacing() const { return h_; }
  bool dirichlet() const { return dirichlet_; }
  /// Parameter value of node j.
  double parameter(int j) const;
  /// Quadrature over the grid (periodic sum or trapezoid on the interval).
  double integrate(const Eigen::VectorXd& f) const;

 private:
  int n_;
  SpatialScheme scheme_;
  bool dirichlet_;
  double origin_;
  double h_;
  std::unique_ptr<SpectralDifferentiator> spectral_;
};

Derivatives spatial_derivatives(const LoopState& state, SpatialScheme scheme);

/// F_j = Laplacian u_j - Pi_{u_j}(du_j, du_j) - Z~_{u_j}(du_j). Throws
/// LeftTubularNeighborhood or NonFiniteValue.
Eigen::MatrixXd rhs(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                    const SpatialOperator& op);
Eigen::MatrixXd rhs(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                    SpatialScheme scheme = SpatialScheme::Central2);

/// Time stepper bound to one configuration.
class Stepper {
 public:
  Stepper(const FlowConfig& config, const ManifoldModel& model, const ForceField& force,
          double reference_sup);
  LoopState step(const LoopState& state, double dt) const;
  const SpatialOperator& op() const { return op_; }

 private:
  Eigen::MatrixXd velocity(const LoopState& state) const;
  void apply_boundary(LoopState& state) const;

  FlowConfig config_;
  ManifoldModel model_;
  ForceField force_;
  double reference_sup_;
  SpatialOperator op_;
};

/// One explicit step of size config.effective_dt(); blow-up is measured
/// relative to the incoming state.
LoopState step(const LoopState& state, const FlowConfig& config, const ManifoldModel& model,
               const ForceField& force);

/// Integrates from f to config.t_end, recording every `record_every` steps and
/// the final state. Integrator failures end the run early with status Failed
/// and the last good state recorded. Rejects k >= 2 forces with Unsupported.
FlowTrajectory integrate(const LoopState& f, const FlowConfig& config, const ManifoldModel& model,
                         const ForceField& force);

}  // namespace magflow
