#pragma once

// Hand-rolled generators for the property tests. Every generator draws from
// one seeded engine so failures reproduce.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "magflow/geometry.hpp"

namespace magflow::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed = 12345) : rng_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Eigen::VectorXd vector(int n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(-scale, scale);
    return v;
  }

  Eigen::MatrixXd matrix(int rows, int cols, double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows * cols; ++i) m.data()[i] = uniform(-scale, scale);
    return m;
  }

  /// Random point of M from random intrinsic parameters.
  Vec point_on(const ManifoldModel& m) {
    Vec p(m.intrinsic_dim());
    for (int i = 0; i < p.size(); ++i) p(i) = uniform(0.0, 2 * kPi);
    if (m.kind() == ModelKind::Sphere) p(0) = uniform(0.2, kPi - 0.2);
    if (m.kind() == ModelKind::Cylinder) p(1) = uniform(-2.0, 2.0);
    return m.parametrize(p);
  }

  /// Random point at distance below `fraction` * epsilon from M.
  Vec point_near(const ManifoldModel& m, double fraction = 0.9) {
    const Vec x = point_on(m);
    if (m.is_flat()) return x;
    Vec d = vector(m.ambient_dim());
    d.normalize();
    return x + uniform(0.0, fraction) * m.tubular_radius() * d;
  }

  /// Random tangent vector at a point of M.
  Vec tangent_at(const ManifoldModel& m, const Vec& x, double scale = 1.0) {
    return tangent_project(m, x, Vec(vector(m.ambient_dim(), scale)));
  }

  /// A model drawn from the whole zoo (line excluded unless allowed).
  ManifoldModel model(bool include_line = false) {
    switch (integer(0, include_line ? 6 : 5)) {
      case 0: return ManifoldModel::sphere(uniform(0.5, 2.0));
      case 1: return ManifoldModel::cylinder(uniform(0.5, 2.0));
      case 2: return ManifoldModel::torus_of_revolution(uniform(2.0, 3.0), uniform(0.3, 1.0));
      case 3: return ManifoldModel::flat_torus(2);
      case 4: return ManifoldModel::flat_torus(3);
      case 5: return ManifoldModel::flat_torus(4);
      default: return ManifoldModel::line();
    }
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace magflow::testing
