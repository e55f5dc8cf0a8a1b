#include "magflow/flow.hpp"

#include <cmath>
#include <sstream>

#include "magflow/analysis.hpp"
#include "magflow/spectral.hpp"

namespace magflow {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Eigen::VectorXd shift_of(const LoopState& state) {
  if (state.period_shift.size() == state.dim()) return state.period_shift;
  return Eigen::VectorXd::Zero(state.dim());
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorKind::NonFiniteValue, std::string("non-finite ") + what);
}

}  // namespace

LoopState LoopState::from_nodes(const Eigen::MatrixXd& positions, double t) {
  return {positions, t, Eigen::VectorXd::Zero(positions.rows())};
}

double FlowConfig::spacing() const {
  if (dirichlet) return 2.0 * dirichlet->half_length / (nodes - 1);
  return kTwoPi / nodes;
}

double FlowConfig::effective_dt() const {
  const double h = spacing();
  const double base = dt ? *dt : 0.25 * h * h;
  if (t_end <= 0.0) return base;
  return t_end / static_cast<double>(step_count());
}

long FlowConfig::step_count() const {
  if (t_end <= 0.0) return 0;
  const double h = spacing();
  const double base = dt ? *dt : 0.25 * h * h;
  return std::max(1L, static_cast<long>(std::ceil(t_end / base - 1e-9)));
}

SpatialOperator::SpatialOperator(int nodes, SpatialScheme scheme, std::optional<double> dirichlet_half_length)
    : n_(nodes), scheme_(scheme), dirichlet_(dirichlet_half_length.has_value()) {
  if (dirichlet_) {
    if (scheme != SpatialScheme::Central2) {
      throw Error(ErrorKind::ConfigError, "interval truncation supports the central2 scheme only");
    }
    origin_ = -*dirichlet_half_length;
    h_ = 2.0 * *dirichlet_half_length / (nodes - 1);
  } else {
    origin_ = 0.0;
    h_ = kTwoPi / nodes;
  }
  if (scheme == SpatialScheme::Spectral) spectral_ = std::make_unique<SpectralDifferentiator>(nodes);
}

SpatialOperator::~SpatialOperator() = default;
SpatialOperator::SpatialOperator(SpatialOperator&&) noexcept = default;

double SpatialOperator::parameter(int j) const { return origin_ + j * h_; }

double SpatialOperator::integrate(const Eigen::VectorXd& f) const {
  if (!dirichlet_) return h_ * f.sum();
  return h_ * (f.sum() - 0.5 * (f(0) + f(f.size() - 1)));
}

Derivatives SpatialOperator::apply(const LoopState& state) const {
  const int q = state.dim();
  const int n = state.nodes();
  if (n != n_) throw Error(ErrorKind::GridMismatch, "state node count differs from the operator grid");
  Derivatives d{Eigen::MatrixXd(q, n), Eigen::MatrixXd(q, n)};
  const Eigen::MatrixXd& u = state.positions;

  if (dirichlet_) {
    for (int j = 1; j < n - 1; ++j) {
      d.first.col(j) = (u.col(j + 1) - u.col(j - 1)) / (2 * h_);
      d.second.col(j) = (u.col(j + 1) - 2 * u.col(j) + u.col(j - 1)) / (h_ * h_);
    }
    // One-sided second-order stencils at the ends; used by diagnostics only.
    d.first.col(0) = (-3 * u.col(0) + 4 * u.col(1) - u.col(2)) / (2 * h_);
    d.first.col(n - 1) = (3 * u.col(n - 1) - 4 * u.col(n - 2) + u.col(n - 3)) / (2 * h_);
    d.second.col(0) = d.second.col(1);
    d.second.col(n - 1) = d.second.col(n - 2);
    return d;
  }

  const Eigen::VectorXd shift = shift_of(state);
  if (scheme_ == SpatialScheme::Central2) {
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd next = j + 1 < n ? Eigen::VectorXd(u.col(j + 1)) : Eigen::VectorXd(u.col(0) + shift);
      const Eigen::VectorXd prev = j > 0 ? Eigen::VectorXd(u.col(j - 1)) : Eigen::VectorXd(u.col(n - 1) - shift);
      d.first.col(j) = (next - prev) / (2 * h_);
      d.second.col(j) = (next - 2 * u.col(j) + prev) / (h_ * h_);
    }
    return d;
  }

  // Spectral: differentiate the periodic part u - shift * s / (2 pi).
  Eigen::VectorXd row(n), first(n), second(n);
  for (int c = 0; c < q; ++c) {
    for (int j = 0; j < n; ++j) row(j) = u(c, j) - shift(c) * j / static_cast<double>(n);
    spectral_->differentiate(row.data(), first.data(), second.data());
    d.first.row(c) = (first.array() + shift(c) / kTwoPi).matrix().transpose();
    d.second.row(c) = second.transpose();
  }
  return d;
}

Eigen::VectorXd SpatialOperator::second_derivative_scalar(const Eigen::VectorXd& f) const {
  const int n = static_cast<int>(f.size());
  Eigen::VectorXd out(n);
  if (dirichlet_) {
    for (int j = 1; j < n - 1; ++j) out(j) = (f(j + 1) - 2 * f(j) + f(j - 1)) / (h_ * h_);
    out(0) = out(1);
    out(n - 1) = out(n - 2);
    return out;
  }
  for (int j = 0; j < n; ++j) out(j) = (f((j + 1) % n) - 2 * f(j) + f((j + n - 1) % n)) / (h_ * h_);
  return out;
}

Derivatives spatial_derivatives(const LoopState& state, SpatialScheme scheme) {
  return SpatialOperator(state.nodes(), scheme).apply(state);
}

Eigen::MatrixXd rhs(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                    const SpatialOperator& op) {
  if (state.dim() != model.ambient_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "state dimension differs from the ambient dimension");
  }
  check_finite(state.positions, "loop position");
  const int n = state.nodes();
  const Derivatives d = op.apply(state);
  Eigen::MatrixXd F(state.dim(), n);
  for (int j = 0; j < n; ++j) {
    const Vec x = state.node(j);
    if (!model.is_flat()) {
      const double dist = distance_to_manifold(model, x);
      if (!(dist < model.tubular_radius())) {
        std::ostringstream os;
        os << "node " << j << " at distance " << dist << " from " << model.name() << " (t = " << state.t << ")";
        throw Error(ErrorKind::LeftTubularNeighborhood, os.str());
      }
    }
    const Vec du = d.first.col(j);
    F.col(j) = d.second.col(j) - second_fundamental_correction(model, x, du) - extend_vector(force, x, du);
  }
  if (op.dirichlet()) {
    F.col(0).setZero();
    F.col(n - 1).setZero();
  }
  return F;
}

Eigen::MatrixXd rhs(const LoopState& state, const ManifoldModel& model, const ForceField& force,
                    SpatialScheme scheme) {
  return rhs(state, model, force, SpatialOperator(state.nodes(), scheme));
}

Stepper::Stepper(const FlowConfig& config, const ManifoldModel& model, const ForceField& force,
                 double reference_sup)
    : config_(config),
      model_(model),
      force_(force),
      reference_sup_(reference_sup),
      op_(config.nodes, config.spatial,
          config.dirichlet ? std::optional<double>(config.dirichlet->half_length) : std::nullopt) {}

Eigen::MatrixXd Stepper::velocity(const LoopState& state) const { return rhs(state, model_, force_, op_); }

void Stepper::apply_boundary(LoopState& state) const {
  if (!config_.dirichlet) return;
  const int n = state.nodes();
  state.positions.col(0) = Eigen::VectorXd(config_.dirichlet->boundary(op_.parameter(0), state.t));
  state.positions.col(n - 1) = Eigen::VectorXd(config_.dirichlet->boundary(op_.parameter(n - 1), state.t));
}

LoopState Stepper::step(const LoopState& state, double dt) const {
  auto advanced = [&](const Eigen::MatrixXd& velocity, double fraction) {
    LoopState s{state.positions + fraction * dt * velocity, state.t + fraction * dt, state.period_shift};
    apply_boundary(s);
    return s;
  };

  LoopState next;
  if (config_.time == TimeScheme::Euler) {
    next = advanced(velocity(state), 1.0);
  } else {
    const Eigen::MatrixXd k1 = velocity(state);
    const Eigen::MatrixXd k2 = velocity(advanced(k1, 0.5));
    const Eigen::MatrixXd k3 = velocity(advanced(k2, 0.5));
    const Eigen::MatrixXd k4 = velocity(advanced(k3, 1.0));
    next = advanced((k1 + 2 * k2 + 2 * k3 + k4) / 6.0, 1.0);
  }
  next.t = state.t + dt;

  check_finite(next.positions, "value after time step (numerical blow-up)");
  const double sup = next.positions.cwiseAbs().maxCoeff();
  const double limit = config_.blowup_factor * std::max(1.0, reference_sup_);
  if (sup > limit) {
    std::ostringstream os;
    os << "numerical blow-up at t = " << next.t << ": sup|u| = " << sup << " exceeds " << limit;
    throw Error(ErrorKind::NonFiniteValue, os.str());
  }

  if (config_.projection == ProjectionMode::EveryStep && !model_.is_flat()) {
    for (int j = 0; j < next.nodes(); ++j) {
      const Vec x = next.node(j);
      if (!(distance_to_manifold(model_, x) < model_.tubular_radius())) {
        throw Error(ErrorKind::LeftTubularNeighborhood, "node left the tube during the step");
      }
      next.positions.col(j) = project(model_, x);
    }
  }
  return next;
}

LoopState step(const LoopState& state, const FlowConfig& config, const ManifoldModel& model,
               const ForceField& force) {
  const Stepper stepper(config, model, force, state.positions.cwiseAbs().maxCoeff());
  return stepper.step(state, config.effective_dt());
}

FlowTrajectory integrate(const LoopState& f, const FlowConfig& config, const ManifoldModel& model,
                         const ForceField& force) {
  if (force.degree() >= 2) {
    throw Error(ErrorKind::Unsupported, "time integration is implemented for 1-forces (loops) only");
  }
  if (force.model().name() != model.name()) {
    throw Error(ErrorKind::ConfigError, "force is defined on " + force.model().name() + ", not " + model.name());
  }
  if (config.dirichlet) {
    if (config.nodes < 16) throw Error(ErrorKind::ConfigError, "need at least 16 nodes");
  } else if (config.nodes < 16 || !is_power_of_two(config.nodes)) {
    throw Error(ErrorKind::ConfigError, "node count must be a power of two >= 16");
  }
  if (f.nodes() != config.nodes) throw Error(ErrorKind::GridMismatch, "initial loop node count differs from config");
  if (f.dim() != model.ambient_dim()) throw Error(ErrorKind::DimensionMismatch, "initial loop dimension mismatch");
  if (!(config.t_end >= 0.0)) throw Error(ErrorKind::ConfigError, "t_end must be nonnegative");
  if (config.dt && !(*config.dt > 0.0)) throw Error(ErrorKind::ConfigError, "dt must be positive");
  if (config.record_every < 1) throw Error(ErrorKind::ConfigError, "record_every must be >= 1");

  FlowTrajectory traj{{}, {}, FlowStatus::Completed, std::nullopt, {}, config, model, force,
                      config.effective_dt()};
  LoopState state = f;
  if (state.period_shift.size() != state.dim()) state.period_shift = Eigen::VectorXd::Zero(state.dim());
  if (config.projection == ProjectionMode::EveryStep && !model.is_flat()) {
    for (int j = 0; j < state.nodes(); ++j) state.positions.col(j) = project(model, state.node(j));
  }

  const Stepper stepper(config, model, force, state.positions.cwiseAbs().maxCoeff());
  const double t0 = state.t;
  const long steps = config.step_count();
  const double dt = traj.dt;

  auto record = [&](const LoopState& s) {
    traj.diagnostics.push_back(compute_diagnostics(s, model, force, stepper.op()));
    traj.states.push_back(s);
  };
  record(state);

  for (long i = 1; i <= steps; ++i) {
    try {
      LoopState next = stepper.step(state, dt);
      next.t = i == steps ? t0 + config.t_end : t0 + i * dt;
      state = std::move(next);
      if (i % config.record_every == 0 || i == steps) record(state);
    } catch (const Error& e) {
      traj.status = FlowStatus::Failed;
      traj.error = e.kind();
      traj.message = e.what();
      if (traj.states.back().t != state.t) {
        try {
          record(state);
        } catch (const Error&) {
          // Diagnostics need a valid state; keep the trajectory as it is.
        }
      }
      break;
    }
  }
  return traj;
}

}  // namespace magflow
