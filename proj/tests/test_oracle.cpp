#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "magflow/analysis.hpp"
#include "magflow/errors.hpp"
#include "magflow/oracle.hpp"

using namespace magflow;
using magflow::testing::Gen;

namespace {

const Complex kI(0.0, 1.0);

CylinderFourierState random_state(Gen& gen, int winding, int max_mode, double scale = 0.3) {
  CylinderFourierState st;
  st.winding = winding;
  for (int n = -max_mode; n <= max_mode; ++n) st.modes[n] = scale * Complex(gen.uniform(), gen.uniform()) / (1.0 + n * n);
  return st;
}

// Direct evaluation of w s + sum c_n e^{ins}.
Complex direct(const CylinderFourierState& st, double s) {
  Complex xi = static_cast<double>(st.winding) * s;
  for (const auto& [n, c] : st.modes) xi += c * std::exp(kI * static_cast<double>(n) * s);
  return xi;
}

void sample(const CylinderFourierState& st, int nodes, Eigen::VectorXd& phi, Eigen::VectorXd& z) {
  phi.resize(nodes);
  z.resize(nodes);
  for (int j = 0; j < nodes; ++j) {
    const Complex xi = direct(st, kTwoPi * j / nodes);
    phi(j) = xi.real();
    z(j) = xi.imag();
  }
}

}  // namespace

TEST(Oracle, DecomposeRecoversModesAndWinding) {
  Gen gen(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = gen.integer(-2, 2);
    const CylinderFourierState st = random_state(gen, w, 6);
    Eigen::VectorXd phi, z;
    sample(st, 64, phi, z);
    const CylinderFourierState got = decompose(phi, z);
    EXPECT_EQ(got.winding, w);
    for (const auto& [n, c] : got.modes) {
      const Complex expected = st.modes.count(n) ? st.modes.at(n) : Complex(0.0);
      EXPECT_LT(std::abs(c - expected), 1e-13) << n;
    }
    for (int i = 0; i < 5; ++i) {
      const double s = gen.uniform(0.0, kTwoPi);
      EXPECT_LT(std::abs(reconstruct(got, s) - direct(st, s)), 1e-12);
    }
  }
}

TEST(Oracle, DecomposeRejectsUnresolvedModes) {
  Eigen::VectorXd phi(64), z(64);
  for (int j = 0; j < 64; ++j) {
    phi(j) = 0.1 * std::cos(20 * kTwoPi * j / 64);
    z(j) = 0.0;
  }
  try {
    decompose(phi, z, 10);
    FAIL() << "expected AliasedInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AliasedInput);
  }
  EXPECT_NO_THROW(decompose(phi, z, 20));
}

TEST(Oracle, EvolveAppliesClosedFormMultipliers) {
  Gen gen(42);
  const CylinderFourierState st = random_state(gen, 1, 4);
  const CylinderFourierState a = evolve(st, 0.3);
  for (const auto& [n, c] : st.modes) {
    Complex expected = c * std::exp(-(n * n + n) * 0.3);
    if (n == 0) expected += kI * 0.3;
    EXPECT_LT(std::abs(a.modes.at(n) - expected), 1e-15);
  }
  EXPECT_DOUBLE_EQ(a.t, 0.3);
  const CylinderFourierState b = evolve(evolve(st, 0.1), 0.2);
  for (const auto& [n, c] : a.modes) EXPECT_LT(std::abs(b.modes.at(n) - c), 1e-15);
}

TEST(Oracle, EvolvedStateSolvesTheEquation) {
  // xi_t = xi'' + i xi', checked with finite differences in s and t.
  Gen gen(43);
  const CylinderFourierState st = evolve(random_state(gen, 1, 4), 0.2);
  const double d = 1e-4;
  const auto residual = oracle_residual(st, 16);
  for (int j = 0; j < 16; ++j) {
    const double s = kTwoPi * j / 16;
    const Complex xs1 = (direct(st, s + d) - direct(st, s - d)) / (2 * d);
    const Complex xs2 = (direct(st, s + d) - 2.0 * direct(st, s) + direct(st, s - d)) / (d * d);
    const Complex xt = (direct(evolve(st, d), s) - direct(evolve(st, -d), s)) / (2 * d);
    EXPECT_LT(std::abs(xt - (xs2 + kI * xs1)), 1e-5);
    EXPECT_LT(std::abs(residual[j] - xt), 1e-6);
  }
}

TEST(Oracle, PowerSeriesMatchesClosedFormForShortTimes) {
  Gen gen(44);
  for (int w : {0, 1}) {
    const CylinderFourierState st = random_state(gen, w, 3);
    const auto a0 = reconstruct_samples(st, 32);
    const auto series = series_coefficients(a0, 20);
    ASSERT_EQ(series.size(), 21u);
    const double t = 0.05;
    const auto exact = reconstruct_samples(evolve(st, t), 32);
    for (int j = 0; j < 32; ++j) {
      Complex sum = 0.0;
      for (int m = 20; m >= 0; --m) sum = sum * t + series[m][j];
      EXPECT_LT(std::abs(sum - exact[j]), 1e-12);
    }
  }
  EXPECT_THROW(series_coefficients(std::vector<Complex>(8), 26), Error);
}

TEST(Oracle, EmbeddingAndComplexification) {
  Gen gen(45);
  const CylinderFourierState st = random_state(gen, 1, 3);
  const LoopState u = embed_cylinder(st, 32);
  Eigen::MatrixXd e_phi(3, 32), e_z = Eigen::MatrixXd::Zero(3, 32);
  for (int j = 0; j < 32; ++j) {
    const Complex xi = direct(st, kTwoPi * j / 32);
    EXPECT_NEAR(u.positions(0, j), std::cos(xi.real()), 1e-12);
    EXPECT_NEAR(u.positions(1, j), std::sin(xi.real()), 1e-12);
    EXPECT_NEAR(u.positions(2, j), xi.imag(), 1e-12);
    e_phi.col(j) << -std::sin(xi.real()), std::cos(xi.real()), 0.0;
    e_z(2, j) = 1.0;
  }
  for (const Complex c : complexify(u, e_phi)) EXPECT_LT(std::abs(c - 1.0), 1e-12);
  for (const Complex c : complexify(u, e_z)) EXPECT_LT(std::abs(c - kI), 1e-12);
  try {
    embed_cylinder(st, 32, 2.0);
    FAIL() << "expected UnsupportedModel";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedModel);
  }
}

TEST(Oracle, ParsevalEnergyMatchesDiagnostics) {
  // E = (1/2) int |xi'|^2 = pi (w^2 + sum n^2 |c_n|^2) on the unit cylinder.
  Gen gen(46);
  const ManifoldModel m = ManifoldModel::cylinder(1.0);
  const SpatialOperator op(64, SpatialScheme::Spectral);
  for (int w : {0, 1, 2}) {
    const CylinderFourierState st = random_state(gen, w, 5);
    double expected = w * w;
    for (const auto& [n, c] : st.modes) expected += n * n * std::norm(c);
    expected *= kPi;
    const StateDiagnostics d = compute_diagnostics(embed_cylinder(st, 64), m, ForceField::none(m), op);
    EXPECT_NEAR(d.E, expected, 1e-10 * std::max(1.0, expected));
  }
}

TEST(Oracle, BlowUpWitness) {
  std::vector<double> s, t;
  for (int i = 0; i <= 40; ++i) s.push_back(-2.0 + 0.1 * i);
  for (int i = 0; i < 20; ++i) t.push_back(0.049 * i);
  EXPECT_LE(blow_up_residual(1.0, s, t), 1e-10);
  const double coarse = blow_up_residual_fd(1.0, 1.0, 33, 0.5);
  const double fine = blow_up_residual_fd(1.0, 1.0, 65, 0.5);
  EXPECT_GT(coarse, 0.0);
  EXPECT_NEAR(coarse / fine, 4.0, 0.1);
}
