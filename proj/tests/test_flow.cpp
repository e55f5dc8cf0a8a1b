#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "magflow/analysis.hpp"
#include "magflow/errors.hpp"
#include "magflow/flow.hpp"

using namespace magflow;
using magflow::testing::Gen;

namespace {

Eigen::VectorXd grid(int n) {
  Eigen::VectorXd s(n);
  for (int j = 0; j < n; ++j) s(j) = kTwoPi * j / n;
  return s;
}

// Loop on the flat 2-torus: (c0 + a cos(m s), b sin(m s)).
LoopState flat_mode(int n, int m, double a, double b) {
  const Eigen::VectorXd s = grid(n);
  Eigen::MatrixXd p(2, n);
  for (int j = 0; j < n; ++j) {
    p(0, j) = 1.0 + a * std::cos(m * s(j));
    p(1, j) = b * std::sin(m * s(j));
  }
  return LoopState::from_nodes(p);
}

double max_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::ConfigError;
}

}  // namespace

TEST(Flow, Central2IsSecondOrder) {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const LoopState u = flat_mode(n, 3, 0.7, 0.4);
    const Derivatives d = spatial_derivatives(u, SpatialScheme::Central2);
    const Eigen::VectorXd s = grid(n);
    double err = 0.0;
    for (int j = 0; j < n; ++j) {
      err = std::max(err, std::abs(d.first(0, j) + 2.1 * std::sin(3 * s(j))));
      err = std::max(err, std::abs(d.second(1, j) + 3.6 * std::sin(3 * s(j))));
    }
    if (prev > 0) {
      EXPECT_GT(prev / err, 3.8);
    }
    prev = err;
  }
}

TEST(Flow, SpectralDerivativesAreExactForResolvedModes) {
  const LoopState u = flat_mode(64, 5, 0.7, 0.4);
  const Derivatives d = spatial_derivatives(u, SpatialScheme::Spectral);
  const Eigen::VectorXd s = grid(64);
  for (int j = 0; j < 64; ++j) {
    EXPECT_NEAR(d.first(0, j), -3.5 * std::sin(5 * s(j)), 1e-12);
    EXPECT_NEAR(d.first(1, j), 2.0 * std::cos(5 * s(j)), 1e-12);
    EXPECT_NEAR(d.second(0, j), -17.5 * std::cos(5 * s(j)), 1e-11);
  }
}

TEST(Flow, PeriodShiftEntersDerivatives) {
  for (auto scheme : {SpatialScheme::Central2, SpatialScheme::Spectral}) {
    const int n = 64;
    const Eigen::VectorXd s = grid(n);
    Eigen::MatrixXd p(2, n);
    for (int j = 0; j < n; ++j) {
      p(0, j) = s(j);
      p(1, j) = 2.0 * s(j) + std::sin(s(j));
    }
    LoopState u = LoopState::from_nodes(p);
    u.period_shift = Eigen::Vector2d(kTwoPi, 2 * kTwoPi);
    const Derivatives d = spatial_derivatives(u, scheme);
    const double tol = scheme == SpatialScheme::Spectral ? 1e-11 : 2e-3;
    for (int j = 0; j < n; ++j) {
      EXPECT_NEAR(d.first(0, j), 1.0, 1e-11);
      EXPECT_NEAR(d.first(1, j), 2.0 + std::cos(s(j)), tol);
      EXPECT_NEAR(d.second(0, j), 0.0, 1e-9);
    }
  }
}

TEST(Flow, ZeroForceRhsOnFlatTorusIsLaplacian) {
  Gen gen(31);
  const ManifoldModel m = ManifoldModel::flat_torus(3);
  const ForceField none = ForceField::none(m);
  const LoopState u = LoopState::from_nodes(gen.matrix(3, 32, 2.0));
  const Derivatives d = spatial_derivatives(u, SpatialScheme::Central2);
  EXPECT_LT(max_error(rhs(u, m, none), d.second), 1e-14);
}

TEST(Flow, HeatModeDecaysLikeTheDiscreteMultiplier) {
  // Euler on central differences: each step multiplies mode m by 1 - dt lambda_h.
  const ManifoldModel m = ManifoldModel::flat_torus(2);
  const int n = 64, mode = 3;
  FlowConfig cfg;
  cfg.nodes = n;
  cfg.t_end = 0.5;
  const double h = kTwoPi / n;
  const double lambda = (2 - 2 * std::cos(mode * h)) / (h * h);
  const FlowTrajectory tr = integrate(flat_mode(n, mode, 0.8, 0.5), cfg, m, ForceField::none(m));
  ASSERT_EQ(tr.status, FlowStatus::Completed);
  const double factor = std::pow(1 - tr.dt * lambda, static_cast<double>(cfg.step_count()));
  const LoopState expected = flat_mode(n, mode, 0.8 * factor, 0.5 * factor);
  EXPECT_LT(max_error(tr.states.back().positions, expected.positions), 1e-12);
  EXPECT_NEAR(factor, std::exp(-mode * mode * 0.5), 2e-3);
}

TEST(Flow, SpectralRk4MatchesStabilityPolynomial) {
  const ManifoldModel m = ManifoldModel::flat_torus(2);
  const int n = 32, mode = 4;
  FlowConfig cfg;
  cfg.nodes = n;
  cfg.t_end = 0.2;
  cfg.dt = 0.01;
  cfg.spatial = SpatialScheme::Spectral;
  cfg.time = TimeScheme::RK4;
  const FlowTrajectory tr = integrate(flat_mode(n, mode, 0.3, 0.6), cfg, m, ForceField::none(m));
  ASSERT_EQ(tr.status, FlowStatus::Completed);
  const double z = -mode * mode * tr.dt;
  const double r = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
  const double factor = std::pow(r, static_cast<double>(cfg.step_count()));
  const LoopState expected = flat_mode(n, mode, 0.3 * factor, 0.6 * factor);
  EXPECT_LT(max_error(tr.states.back().positions, expected.positions), 1e-12);
  EXPECT_NEAR(factor, std::exp(-mode * mode * 0.2), 1e-6);
}

TEST(Flow, GreatCircleIsStationaryOnSphere) {
  const ManifoldModel m = ManifoldModel::sphere(1.0);
  const int n = 64;
  const Eigen::VectorXd s = grid(n);
  Eigen::MatrixXd p(3, n);
  for (int j = 0; j < n; ++j) p.col(j) << std::cos(s(j)), 0.6 * std::sin(s(j)), 0.8 * std::sin(s(j));
  const LoopState u = LoopState::from_nodes(p);
  const Eigen::MatrixXd F = rhs(u, m, ForceField::none(m));
  // Pi is differenced numerically, so the tangential part is only near zero.
  for (int j = 0; j < n; ++j) EXPECT_LT(tangent_project(m, u.node(j), F.col(j)).norm(), 1e-7);
  FlowConfig cfg;
  cfg.nodes = n;
  cfg.t_end = 0.5;
  const FlowTrajectory tr = integrate(u, cfg, m, ForceField::none(m));
  ASSERT_EQ(tr.status, FlowStatus::Completed);
  EXPECT_LT(max_error(tr.states.back().positions, p), 1e-8);
}

TEST(Flow, ProjectionKeepsLoopOnManifold) {
  Gen gen(32);
  const ManifoldModel m = ManifoldModel::torus_of_revolution(2.0, 0.7);
  const int n = 32;
  Eigen::MatrixXd p(3, n);
  for (int j = 0; j < n; ++j) {
    Vec q(2);
    q << kTwoPi * j / n, 1.0 + 0.4 * std::sin(2 * kTwoPi * j / n);
    p.col(j) = m.parametrize(q);
  }
  FlowConfig cfg;
  cfg.nodes = n;
  cfg.t_end = 0.2;
  const FlowTrajectory tr = integrate(LoopState::from_nodes(p), cfg, m, ForceField::radial_cross(m));
  ASSERT_EQ(tr.status, FlowStatus::Completed);
  for (const LoopState& st : tr.states)
    for (int j = 0; j < n; ++j) EXPECT_LT(distance_to_manifold(m, st.node(j)), 1e-12);
}

TEST(Flow, RecordingScheduleAndEffectiveStep) {
  FlowConfig cfg;
  cfg.nodes = 16;
  cfg.t_end = 1.0;
  cfg.dt = 0.3;
  EXPECT_EQ(cfg.step_count(), 4);
  EXPECT_DOUBLE_EQ(cfg.effective_dt(), 0.25);
  cfg.dt.reset();
  const double h = kTwoPi / 16;
  EXPECT_GE(0.25 * h * h, cfg.effective_dt() - 1e-15);

  const ManifoldModel m = ManifoldModel::flat_torus(2);
  cfg.t_end = 0.1;
  cfg.dt = 0.01;
  cfg.record_every = 3;
  const FlowTrajectory tr = integrate(flat_mode(16, 1, 0.1, 0.1), cfg, m, ForceField::none(m));
  std::vector<double> times;
  for (const auto& st : tr.states) times.push_back(st.t);
  ASSERT_EQ(times.size(), 5u);
  EXPECT_DOUBLE_EQ(times[0], 0.0);
  EXPECT_NEAR(times[1], 0.03, 1e-15);
  EXPECT_NEAR(times[3], 0.09, 1e-15);
  EXPECT_DOUBLE_EQ(times[4], 0.1);
  EXPECT_EQ(tr.diagnostics.size(), tr.states.size());

  cfg.t_end = 0.0;
  const FlowTrajectory zero = integrate(flat_mode(16, 1, 0.1, 0.1), cfg, m, ForceField::none(m));
  EXPECT_EQ(zero.states.size(), 1u);
  EXPECT_EQ(zero.status, FlowStatus::Completed);
}

TEST(Flow, SingleStepIsEulerUpdateOnFlatTorus) {
  Gen gen(33);
  const ManifoldModel m = ManifoldModel::flat_torus(2);
  const ForceField z = ForceField::parallel_rotation(m, 0.7);
  const LoopState u = LoopState::from_nodes(gen.matrix(2, 16));
  FlowConfig cfg;
  cfg.nodes = 16;
  cfg.dt = 1e-3;
  cfg.t_end = 1e-3;
  const LoopState next = step(u, cfg, m, z);
  EXPECT_LT(max_error(next.positions, u.positions + 1e-3 * rhs(u, m, z)), 1e-15);
}

TEST(Flow, WindingLoopKeepsItsClass) {
  const ManifoldModel m = ManifoldModel::flat_torus(2);
  const int n = 32;
  const Eigen::VectorXd s = grid(n);
  Eigen::MatrixXd p(2, n);
  for (int j = 0; j < n; ++j) p.col(j) << s(j), 0.3 * std::sin(s(j));
  LoopState u = LoopState::from_nodes(p);
  u.period_shift = Eigen::Vector2d(kTwoPi, 0.0);
  FlowConfig cfg;
  cfg.nodes = n;
  cfg.t_end = 0.3;
  const FlowTrajectory tr = integrate(u, cfg, m, ForceField::none(m));
  ASSERT_EQ(tr.status, FlowStatus::Completed);
  const LoopState& last = tr.states.back();
  EXPECT_EQ(last.period_shift, u.period_shift);
  for (int j = 0; j < n; ++j) EXPECT_NEAR(last.positions(0, j), s(j), 1e-12);
}

TEST(Flow, DirichletLineFollowsSelfSimilarSolution) {
  // u = s / (T - t) solves u_t = u'' + u u' exactly; central differences are exact in s.
  const ManifoldModel m = ManifoldModel::line();
  const ForceField z = ForceField::linear_scalar(m);
  const double T = 1.0, L = 1.0;
  FlowConfig cfg;
  cfg.nodes = 33;
  cfg.dt = 1e-4;
  cfg.t_end = 0.5;
  cfg.dirichlet = DirichletInterval{L, [T](double s, double t) { return Vec::Constant(1, s / (T - t)); }};
  Eigen::MatrixXd p(1, 33);
  for (int j = 0; j < 33; ++j) p(0, j) = (-L + j * 2 * L / 32) / T;
  const LoopState u0 = LoopState::from_nodes(p);
  const SpatialOperator op(33, SpatialScheme::Central2, L);
  const Eigen::MatrixXd F = rhs(u0, m, z, op);
  for (int j = 1; j < 32; ++j) EXPECT_NEAR(F(0, j), p(0, j) / T, 1e-12);
  const FlowTrajectory tr = integrate(u0, cfg, m, z);
  ASSERT_EQ(tr.status, FlowStatus::Completed);
  const LoopState& last = tr.states.back();
  for (int j = 0; j < 33; ++j) {
    const double expected = op.parameter(j) / (T - 0.5);
    EXPECT_NEAR(last.positions(0, j), expected, 1e-3);
  }
  EXPECT_DOUBLE_EQ(last.positions(0, 0), -L / (T - 0.5));
}

TEST(Flow, IntegrationIsDeterministic) {
  const ManifoldModel m = ManifoldModel::cylinder(1.0);
  const int n = 32;
  Eigen::MatrixXd p(3, n);
  for (int j = 0; j < n; ++j) {
    const double s = kTwoPi * j / n;
    p.col(j) << std::cos(s + 0.3 * std::sin(2 * s)), std::sin(s + 0.3 * std::sin(2 * s)), 0.2 * std::cos(s);
  }
  FlowConfig cfg;
  cfg.nodes = n;
  cfg.t_end = 0.1;
  const ForceField z = ForceField::constant_cross(m, Eigen::Vector3d(0, 0, 1));
  const FlowTrajectory a = integrate(LoopState::from_nodes(p), cfg, m, z);
  const FlowTrajectory b = integrate(LoopState::from_nodes(p), cfg, m, z);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_TRUE(a.states[i].positions == b.states[i].positions);
}

TEST(Flow, ConfigurationErrors) {
  const ManifoldModel m = ManifoldModel::flat_torus(3);
  const LoopState u = LoopState::from_nodes(Eigen::MatrixXd::Zero(3, 48));
  FlowConfig cfg;
  cfg.nodes = 48;
  EXPECT_EQ(kind_of([&] { integrate(u, cfg, m, ForceField::none(m)); }), ErrorKind::ConfigError);
  cfg.nodes = 32;
  EXPECT_EQ(kind_of([&] { integrate(u, cfg, m, ForceField::none(m)); }), ErrorKind::GridMismatch);
  cfg.nodes = 48;
  EXPECT_EQ(kind_of([&] { integrate(u, cfg, m, ForceField::parallel_volume(m, 1.0)); }), ErrorKind::Unsupported);
  const ManifoldModel other = ManifoldModel::flat_torus(2);
  cfg.nodes = 16;
  const LoopState v = LoopState::from_nodes(Eigen::MatrixXd::Zero(3, 16));
  EXPECT_EQ(kind_of([&] { integrate(v, cfg, m, ForceField::none(other)); }), ErrorKind::ConfigError);
}

TEST(Flow, LeavingTheTubeEndsTheRun) {
  const ManifoldModel m = ManifoldModel::sphere(1.0);
  Eigen::MatrixXd p(3, 16);
  // Unprojected, a circle of radius rho has radial velocity 1 - rho; a step of
  // 2.5 overshoots from 1.45 to 0.325, outside the tube of radius 1/2.
  for (int j = 0; j < 16; ++j) p.col(j) << 1.45 * std::cos(kTwoPi * j / 16), 1.45 * std::sin(kTwoPi * j / 16), 0.0;
  FlowConfig cfg;
  cfg.nodes = 16;
  cfg.projection = ProjectionMode::Never;
  cfg.dt = 2.5;
  cfg.t_end = 25.0;
  const FlowTrajectory tr = integrate(LoopState::from_nodes(p), cfg, m, ForceField::none(m));
  EXPECT_EQ(tr.status, FlowStatus::Failed);
  ASSERT_TRUE(tr.error.has_value());
  EXPECT_EQ(*tr.error, ErrorKind::LeftTubularNeighborhood);
  EXPECT_DOUBLE_EQ(tr.states.back().t, 0.0);

  p *= 1.6 / 1.45;
  EXPECT_EQ(kind_of([&] { rhs(LoopState::from_nodes(p), m, ForceField::none(m)); }),
            ErrorKind::LeftTubularNeighborhood);
}

TEST(Flow, UnstableStepReportsNonFiniteValue) {
  const ManifoldModel m = ManifoldModel::flat_torus(2);
  Gen gen(34);
  FlowConfig cfg;
  cfg.nodes = 64;
  cfg.dt = 0.1;
  cfg.t_end = 10.0;
  const FlowTrajectory tr = integrate(LoopState::from_nodes(gen.matrix(2, 64)), cfg, m, ForceField::none(m));
  EXPECT_EQ(tr.status, FlowStatus::Failed);
  ASSERT_TRUE(tr.error.has_value());
  EXPECT_EQ(*tr.error, ErrorKind::NonFiniteValue);
  EXPECT_LT(tr.states.back().t, cfg.t_end);
  for (const auto& st : tr.states) EXPECT_TRUE(st.positions.allFinite());
}
