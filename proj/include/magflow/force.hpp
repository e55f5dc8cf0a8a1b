#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magflow/exterior.hpp"
#include "magflow/geometry.hpp"

namespace magflow {

enum class ForceKind {
  None,
  ConstantCross,     ///< Z(v) = v x B, B constant (R^3 targets)
  RadialCross,       ///< Z(v) = v x (x, y, 0) on Cylinder / TorusOfRevolution
  ParallelRotation,  ///< Z = c J on FlatTorus(2)
  LinearScalar,      ///< Z_s(v) = -s v on the line
  ParallelVolume,    ///< k = 2 on FlatTorus(3): <w, Z(xi)> = c vol(w, xi)
  Custom,            ///< tabulated samples
};

/// Sup norms of Z and of its covariant derivative over M.
struct NormConstants {
  double sup = 0.0;
  double grad_sup = 0.0;
  bool estimated = false;  ///< true when obtained by sampling (possible under-estimate)
};

/// One tabulated value of a custom field: Z at `point` as a q x C(q,k) matrix.
struct ForceSample {
  Eigen::VectorXd point;
  Eigen::MatrixXd matrix;
};

struct ClosednessReport {
  double value = 0.0;            ///< max over samples of |dOmega| in the wedge metric
  bool trivially_closed = false; ///< k + 1 >= intrinsic dimension
};

/// A k-force on one of the built-in manifold models.
///
/// Internally Z is stored as an ambient field Zhat; the value on M is the
/// tangential part P Zhat(P . ) so that skew-symmetry and tangency hold to
/// roundoff for every kind.
class ForceField {
 public:
  static ForceField none(const ManifoldModel& model);
  static ForceField constant_cross(const ManifoldModel& model, const Eigen::Vector3d& B);
  static ForceField radial_cross(const ManifoldModel& model);
  static ForceField parallel_rotation(const ManifoldModel& model, double c);
  static ForceField linear_scalar(const ManifoldModel& model);
  static ForceField parallel_volume(const ManifoldModel& model, double c);
  static ForceField custom(const ManifoldModel& model, int degree, std::vector<ForceSample> samples);

  /// Same field multiplied by a constant factor.
  ForceField scaled(double factor) const;

  ForceKind kind() const { return kind_; }
  int degree() const { return degree_; }
  double factor() const { return factor_; }
  const ManifoldModel& model() const { return model_; }
  const Eigen::Vector3d& field_vector() const { return B_; }
  std::string name() const;

  /// Matrix of Z at a point of M: q x C(q,k), mapping wedge coefficients to
  /// tangent vectors. Tangent projection is applied on both sides.
  Eigen::MatrixXd matrix_at(const Vec& x) const;

  /// Z_x(v) for k = 1 with v tangent-projected first. Hot path of the flow.
  Vec apply(const Vec& x, const Vec& v) const;

  /// Norm constants; closed form for built-in kinds where known, otherwise sampled.
  const NormConstants& norms() const { return norms_; }

  /// Frame norm of Z at x: sqrt(sum_I |Z(e_I)|^2) over an orthonormal basis of Lambda^k T_x M.
  double frame_norm_at(const Vec& x) const;

 private:
  ForceField(const ManifoldModel& model, ForceKind kind, int degree);
  Eigen::MatrixXd ambient_matrix(const Vec& x) const;
  void finish();

  ManifoldModel model_;
  ForceKind kind_;
  int degree_;
  double factor_ = 1.0;
  double c_ = 0.0;
  Eigen::Vector3d B_ = Eigen::Vector3d::Zero();
  std::shared_ptr<const std::vector<ForceSample>> samples_;
  NormConstants norms_;
};

/// Z_x(xi) for a tangent multivector xi of degree k at x on M.
Vec evaluate(const ForceField& field, const Vec& x, const MultiVector& xi);

/// Cut-off: 1 for d <= eps/4, 0 for d >= eps/2, C^2 smoothstep in between.
double cutoff(double distance, double eps);

/// Extended field Z~_x(xi) = psi(d) Z_{pi(x)}((d pi_x)^{k}(xi)) at an ambient point of the tube.
Vec extend(const ForceField& field, const Vec& x, const MultiVector& xi);

/// k = 1 shortcut of extend.
Vec extend_vector(const ForceField& field, const Vec& x, const Vec& v);

/// Finite-difference exterior derivative of Omega = G(., Z(.)) on flat models.
ClosednessReport check_closedness(const ForceField& field, int sample_count, std::uint64_t seed = 1);

/// Sampled estimate of (sup |Z|, sup |nabla Z|) over M.
NormConstants estimate_norms(const ForceField& field, int samples_per_dim = 24);

/// Sampled sup over M of the frame norm of Z - Z'.
double sup_difference(const ForceField& a, const ForceField& b, int samples_per_dim = 24);

/// Sample points of M on a regular parameter grid (used by estimators and tests).
std::vector<Vec> sample_manifold(const ManifoldModel& model, int samples_per_dim);

/// Reads custom samples: one row per sample with q point coordinates followed by
/// the q x C(q,k) matrix in row-major order. Lines starting with '#' are ignored.
std::vector<ForceSample> load_force_samples(const std::string& path, int ambient_dim, int degree);

}  // namespace magflow
