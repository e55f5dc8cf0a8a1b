#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "generators.hpp"
#include "magflow/errors.hpp"
#include "magflow/force.hpp"

using namespace magflow;
using magflow::testing::Gen;

namespace {

std::vector<ForceField> zoo() {
  const ManifoldModel s = ManifoldModel::sphere(1.5), c = ManifoldModel::cylinder(0.8),
                      t = ManifoldModel::torus_of_revolution(2.5, 0.7), f2 = ManifoldModel::flat_torus(2),
                      f3 = ManifoldModel::flat_torus(3);
  const Eigen::Vector3d B(0.3, -0.4, 1.2);
  return {ForceField::constant_cross(s, B), ForceField::constant_cross(c, B), ForceField::constant_cross(f3, B),
          ForceField::radial_cross(c),      ForceField::radial_cross(t),      ForceField::parallel_rotation(f2, 1.7),
          ForceField::none(s),              ForceField::parallel_volume(f3, 0.9)};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;  // sentinel: nothing thrown
}

}  // namespace

TEST(Force, SkewSymmetricAndTangent) {
  Gen gen(21);
  for (const ForceField& f : zoo()) {
    const ManifoldModel& m = f.model();
    for (int i = 0; i < 100; ++i) {
      const Vec x = gen.point_on(m);
      const int k = f.degree();
      std::vector<Eigen::VectorXd> vs;
      for (int a = 0; a < k; ++a) vs.emplace_back(gen.tangent_at(m, x));
      const MultiVector xi = wedge(vs);
      const Vec z = evaluate(f, x, xi);
      EXPECT_LT((tangent_project(m, x, z) - z).norm(), 1e-12) << f.name();
      // <v_a, Z(v_1 ^ ... ^ v_k)> = 0: the (k+1)-form vanishes on repeated arguments.
      for (const auto& v : vs) EXPECT_NEAR(v.dot(Eigen::VectorXd(z)), 0.0, 1e-12) << f.name();
      if (k == 1) {
        EXPECT_LT((f.apply(x, Vec(vs[0])) - z).norm(), 1e-12);
      }
    }
  }
}

TEST(Force, ConstantCrossOnFlatTargetIsCrossProduct) {
  const Eigen::Vector3d B(0, 0, 1);
  const ForceField f = ForceField::constant_cross(ManifoldModel::flat_torus(3), B);
  Vec x(3), v(3);
  x << 1, 2, 3;
  v << 1, 0, 0;
  const Vec z = f.apply(x, v);
  EXPECT_DOUBLE_EQ(z(0), 0.0);
  EXPECT_DOUBLE_EQ(z(1), -1.0);
  EXPECT_DOUBLE_EQ(z(2), 0.0);
}

TEST(Force, ParallelRotationIsQuarterTurn) {
  const ForceField f = ForceField::parallel_rotation(ManifoldModel::flat_torus(2), 2.0);
  Vec x(2), v(2);
  x << 0.3, 0.1;
  v << 1, 0;
  const Vec z = f.apply(x, v);
  EXPECT_DOUBLE_EQ(z(0), 0.0);
  EXPECT_DOUBLE_EQ(z(1), 2.0);
}

TEST(Force, ParallelVolumeComponents) {
  const ForceField f = ForceField::parallel_volume(ManifoldModel::flat_torus(3), 1.5);
  const Vec x = Vec::Zero(3);
  const Vec z12 = evaluate(f, x, MultiVector::basis(3, {0, 1}));
  const Vec z13 = evaluate(f, x, MultiVector::basis(3, {0, 2}));
  const Vec z23 = evaluate(f, x, MultiVector::basis(3, {1, 2}));
  EXPECT_DOUBLE_EQ(z12(2), 1.5);
  EXPECT_DOUBLE_EQ(z13(1), -1.5);
  EXPECT_DOUBLE_EQ(z23(0), 1.5);
  EXPECT_NEAR(f.norms().sup, std::sqrt(3.0) * 1.5, 1e-15);
  EXPECT_EQ(kind_of([&] { f.apply(x, x); }), ErrorKind::DegreeMismatch);
}

TEST(Force, ClosedFormNormsAgreeWithSampling) {
  // The stored constants are exact suprema; sampling must never exceed them and
  // must come close on a fine grid.
  for (const ForceField& f : zoo()) {
    const NormConstants exact = f.norms();
    EXPECT_FALSE(exact.estimated) << f.name();
    const NormConstants sampled = estimate_norms(f, 48);
    EXPECT_LE(sampled.sup, exact.sup * (1 + 1e-9) + 1e-12) << f.name();
    EXPECT_GE(sampled.sup, exact.sup * 0.97 - 1e-12) << f.name();
    EXPECT_LE(sampled.grad_sup, exact.grad_sup * (1 + 1e-4) + 1e-6) << f.name();
    EXPECT_GE(sampled.grad_sup, exact.grad_sup * 0.95 - 1e-6) << f.name();
  }
}

TEST(Force, KnownNormValues) {
  const double s2 = std::sqrt(2.0);
  const Eigen::Vector3d B(3, 4, 12);
  EXPECT_NEAR(ForceField::constant_cross(ManifoldModel::flat_torus(3), B).norms().sup, s2 * 13, 1e-12);
  const ForceField cyl = ForceField::constant_cross(ManifoldModel::cylinder(2.0), B);
  EXPECT_NEAR(cyl.norms().sup, s2 * 5, 1e-12);
  EXPECT_NEAR(cyl.norms().grad_sup, s2 * 5 / 2.0, 1e-12);
  EXPECT_NEAR(ForceField::radial_cross(ManifoldModel::cylinder(1.0)).norms().sup, s2, 1e-15);
  EXPECT_EQ(ForceField::radial_cross(ManifoldModel::cylinder(1.0)).norms().grad_sup, 0.0);
  EXPECT_TRUE(std::isinf(ForceField::linear_scalar(ManifoldModel::line()).norms().sup));
}

TEST(Force, ModelValidation) {
  const ManifoldModel s = ManifoldModel::sphere(1.0);
  EXPECT_EQ(kind_of([&] { ForceField::radial_cross(s); }), ErrorKind::UnsupportedModel);
  EXPECT_EQ(kind_of([&] { ForceField::parallel_rotation(ManifoldModel::flat_torus(3), 1.0); }),
            ErrorKind::UnsupportedModel);
  EXPECT_EQ(kind_of([&] { ForceField::parallel_volume(ManifoldModel::flat_torus(2), 1.0); }),
            ErrorKind::UnsupportedModel);
  EXPECT_EQ(kind_of([&] { ForceField::linear_scalar(s); }), ErrorKind::UnsupportedModel);
  EXPECT_EQ(kind_of([&] { ForceField::constant_cross(ManifoldModel::flat_torus(2), {0, 0, 1}); }),
            ErrorKind::UnsupportedModel);
  EXPECT_EQ(kind_of([&] { ForceField::custom(ManifoldModel::flat_torus(2), 3, {}); }), ErrorKind::DegreeOutOfRange);
}

TEST(Force, ScaledMultipliesValuesAndNorms) {
  const ForceField f = ForceField::radial_cross(ManifoldModel::cylinder(1.0));
  const ForceField g = f.scaled(1.5);
  Gen gen(22);
  for (int i = 0; i < 20; ++i) {
    const Vec x = gen.point_on(f.model());
    const Vec v = gen.tangent_at(f.model(), x);
    EXPECT_LT((g.apply(x, v) - 1.5 * f.apply(x, v)).norm(), 1e-14);
  }
  EXPECT_NEAR(g.norms().sup, 1.5 * f.norms().sup, 1e-15);
  EXPECT_NEAR(sup_difference(f, g), 0.5 * f.norms().sup, 1e-12);
}

TEST(Force, CutoffProfile) {
  const double eps = 0.8;
  EXPECT_EQ(cutoff(0.0, eps), 1.0);
  EXPECT_EQ(cutoff(eps / 4, eps), 1.0);
  EXPECT_EQ(cutoff(eps / 2, eps), 0.0);
  EXPECT_EQ(cutoff(eps, eps), 0.0);
  EXPECT_NEAR(cutoff(3 * eps / 8, eps), 0.5, 1e-15);
  double prev = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double d = eps / 4 + (eps / 4) * i / 1000.0;
    const double v = cutoff(d, eps);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  // C^1 at both joins.
  const double h = 1e-7;
  EXPECT_NEAR((cutoff(eps / 4 + h, eps) - 1.0) / h, 0.0, 1e-5);
  EXPECT_NEAR(cutoff(eps / 2 - h, eps) / h, 0.0, 1e-5);
  EXPECT_EQ(cutoff(5.0, std::numeric_limits<double>::infinity()), 1.0);
}

TEST(Force, ExtensionAgreesOnManifoldAndVanishesFarAway) {
  Gen gen(23);
  for (const ForceField& f : zoo()) {
    if (f.degree() != 1 || f.model().is_flat()) continue;
    const ManifoldModel& m = f.model();
    for (int i = 0; i < 50; ++i) {
      const Vec x = gen.point_on(m);
      const Vec v = gen.vector(m.ambient_dim());
      EXPECT_LT((extend_vector(f, x, v) - f.apply(x, tangent_project(m, x, v))).norm(), 1e-12);
      MultiVector xi{m.ambient_dim(), 1, Eigen::VectorXd(v)};
      EXPECT_LT((extend(f, x, xi) - extend_vector(f, x, v)).norm(), 1e-12);
      // Beyond eps/2 the extension is zero.
      const Vec n = outward_normal(m, x);
      const Vec far = x + 0.55 * m.tubular_radius() * n;
      EXPECT_EQ(extend_vector(f, far, v).norm(), 0.0);
      // Inside eps/4 it is Z at pi(x) applied to d pi(v).
      const Vec near = x + 0.2 * m.tubular_radius() * n;
      const Vec expected = f.apply(x, projection_differential(m, near, v));
      EXPECT_LT((extend_vector(f, near, v) - expected).norm(), 1e-10);
    }
  }
}

TEST(Force, ClosednessOfBuiltInFields) {
  const ForceField c = ForceField::constant_cross(ManifoldModel::flat_torus(3), {0.2, 0.5, 1.0});
  const ClosednessReport r = check_closedness(c, 20);
  EXPECT_FALSE(r.trivially_closed);
  EXPECT_LT(r.value, 1e-9);
  EXPECT_TRUE(check_closedness(ForceField::parallel_rotation(ManifoldModel::flat_torus(2), 1.0), 5).trivially_closed);
  EXPECT_TRUE(check_closedness(ForceField::parallel_volume(ManifoldModel::flat_torus(3), 1.0), 5).trivially_closed);
}

namespace {

// Samples of Z_x(v) = f(x) v x e3 on a grid of FlatTorus(3). Omega = f dx0 ^ dx1 is
// closed for f = 1 + 0.5 sin x0 and not closed for f = 1 + 0.5 sin x2.
std::vector<ForceSample> grid_samples(int per, bool depend_on_z) {
  std::vector<ForceSample> out;
  for (int i = 0; i < per; ++i)
    for (int j = 0; j < per; ++j)
      for (int k = 0; k < per; ++k) {
        Eigen::VectorXd p(3);
        p << kTwoPi * i / per, kTwoPi * j / per, kTwoPi * k / per;
        const double f = 1.0 + 0.5 * std::sin(depend_on_z ? p(2) : p(0));
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
        // v x e3 = (v1, -v0, 0).
        m(0, 1) = f;
        m(1, 0) = -f;
        out.push_back({p, m});
      }
  return out;
}

}  // namespace

TEST(Force, CustomFieldReproducesTabulatedValuesAndDetectsNonClosedness) {
  const ManifoldModel m = ManifoldModel::flat_torus(3);
  const ForceField closed = ForceField::custom(m, 1, grid_samples(12, false));
  const ForceField open = ForceField::custom(m, 1, grid_samples(12, true));
  EXPECT_TRUE(closed.norms().estimated);
  Vec x(3), v(3);
  x << 0.7, 1.1, 2.3;
  v << 0.0, 1.0, 0.0;
  const double f = 1.0 + 0.5 * std::sin(0.7);
  EXPECT_NEAR(closed.apply(x, v)(0), f, 2e-2);
  // Periodic lookup: shifting by a period changes nothing.
  Vec shifted = x;
  shifted(0) += kTwoPi;
  EXPECT_LT((closed.apply(shifted, v) - closed.apply(x, v)).norm(), 1e-12);
  const double closed_value = check_closedness(closed, 30).value;
  const double open_value = check_closedness(open, 30).value;
  EXPECT_LT(closed_value, 0.05);
  EXPECT_GT(open_value, 0.1);
}

TEST(Force, CustomFieldIsMadeAlternating) {
  Gen gen(24);
  const ManifoldModel m = ManifoldModel::flat_torus(3);
  std::vector<ForceSample> samples;
  for (int i = 0; i < 40; ++i) samples.push_back({gen.vector(3, 3.0), gen.matrix(3, 3)});
  const ForceField f = ForceField::custom(m, 1, samples);
  for (int i = 0; i < 50; ++i) {
    const Vec x = gen.vector(3, 3.0);
    const Vec v = gen.vector(3);
    EXPECT_NEAR(v.dot(f.apply(x, v)), 0.0, 1e-12);
  }
}

TEST(Force, LoadSamplesFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "magflow_force_samples.txt";
  {
    std::ofstream out(path);
    out << "# point then matrix\n";
    out << "0 0 0, 0 1 0 -1 0 0 0 0 0\n";
    out << "1 0 0  0 2 0 -2 0 0 0 0 0\n";
  }
  const auto samples = load_force_samples(path.string(), 3, 1);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[1].point(0), 1.0);
  EXPECT_EQ(samples[1].matrix(0, 1), 2.0);
  EXPECT_EQ(samples[1].matrix(1, 0), -2.0);
  {
    std::ofstream out(path);
    out << "0 0 0 1 2\n";
  }
  EXPECT_EQ(kind_of([&] { load_force_samples(path.string(), 3, 1); }), ErrorKind::ConfigError);
  std::filesystem::remove(path);
  EXPECT_EQ(kind_of([&] { load_force_samples("/nonexistent/file", 3, 1); }), ErrorKind::IoError);
}
