#pragma once

#include <string>

#include "magflow/types.hpp"

namespace magflow {

enum class ModelKind { Sphere, Cylinder, TorusOfRevolution, FlatTorus, Line };

/// An embedded manifold M in R^q described by its nearest-point projection.
///
/// The zoo is closed: round sphere and cylinder (axis = z), torus of revolution
/// about the z-axis, the flat torus R^n/(2 pi Z)^n and the real line. Flat-torus
/// points are kept unwrapped (universal cover); wrapping happens only when
/// distances or output coordinates are requested.
class ManifoldModel {
 public:
  static ManifoldModel sphere(double radius);
  static ManifoldModel cylinder(double radius);
  static ManifoldModel torus_of_revolution(double major_radius, double minor_radius);
  static ManifoldModel flat_torus(int dim);
  static ManifoldModel line();

  ModelKind kind() const { return kind_; }
  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const { return intrinsic_dim_; }
  /// Constant tubular radius epsilon; +inf for flat models.
  double tubular_radius() const { return tubular_radius_; }
  bool is_flat_quotient() const { return kind_ == ModelKind::FlatTorus; }
  /// pi is the identity (flat torus and line).
  bool is_flat() const { return kind_ == ModelKind::FlatTorus || kind_ == ModelKind::Line; }
  bool is_compact() const;

  double radius() const { return radius_; }
  double major_radius() const { return major_; }
  double minor_radius() const { return radius_; }
  /// Length scale used for finite-difference steps.
  double scale() const;
  /// sup over M of |R^M| as a (4,0)-tensor; for surfaces |R| = 2|K|.
  double curvature_sup() const;

  std::string name() const;

  /// Point of M for intrinsic parameters (angles / heights / coordinates).
  /// Used to sample M for property tests and norm estimates.
  Vec parametrize(const Vec& params) const;

 private:
  ManifoldModel(ModelKind kind, int ambient, int intrinsic, double radius, double major,
                double eps);

  ModelKind kind_;
  int ambient_dim_;
  int intrinsic_dim_;
  double radius_;
  double major_;
  double tubular_radius_;
};

struct NormalResidual {
  Vec value;             ///< rho(x) = x - pi(x)
  double squared_norm;   ///< h = |rho|^2
};

/// Euclidean distance from x to M (no tube restriction).
double distance_to_manifold(const ManifoldModel& model, const Vec& x);

/// Nearest-point projection. Throws OutsideTubularNeighborhood when
/// dist(x, M) >= epsilon. Flat models return x unchanged.
Vec project(const ManifoldModel& model, const Vec& x);

/// Tangential projector at x on M applied to v.
Vec tangent_project(const ManifoldModel& model, const Vec& x, const Vec& v);

/// Matrix of the tangential projector at x on M (symmetric, idempotent, rank n).
Mat tangent_projector(const ManifoldModel& model, const Vec& x);

/// Orthonormal basis of the tangent space at x on M, as the columns of a q x n matrix.
Mat tangent_frame(const ManifoldModel& model, const Vec& x);

/// Differential of pi at an ambient point x of the tube, applied to v. At
/// points of M this coincides with tangent_project.
Vec projection_differential(const ManifoldModel& model, const Vec& x, const Vec& v);

/// (nabla_X d pi)(X): second directional derivative of pi along X, by central
/// differences with ambient step 1e-4 * scale. Normal to M when x lies on M.
/// Zero for flat models.
Vec second_fundamental_correction(const ManifoldModel& model, const Vec& x, const Vec& X);

/// Closed-form second fundamental correction for Sphere and Cylinder at points
/// of M (cross-check of the finite-difference route). Throws NotApplicable for
/// other models.
Vec second_fundamental_closed_form(const ManifoldModel& model, const Vec& x, const Vec& X);

/// Unit normal pointing away from the axis / centre / core circle. Throws
/// NotApplicable for flat models.
Vec outward_normal(const ManifoldModel& model, const Vec& x);

NormalResidual normal_residual(const ManifoldModel& model, const Vec& x);

/// Representative of x with flat-torus coordinates reduced to [0, 2 pi).
Vec wrap(const ManifoldModel& model, const Vec& x);

/// Difference a - b with flat-torus coordinates reduced to (-pi, pi].
Vec quotient_difference(const ManifoldModel& model, const Vec& a, const Vec& b);

}  // namespace magflow
