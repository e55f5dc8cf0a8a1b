#include "magflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "magflow/errors.hpp"

namespace magflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec zeros(int q) { return Vec::Zero(q); }

// Projection without the tube check; callers guarantee x is away from the
// focal set.
Vec project_raw(const ManifoldModel& m, const Vec& x) {
  switch (m.kind()) {
    case ModelKind::Sphere:
      return m.radius() * x / x.norm();
    case ModelKind::Cylinder: {
      Vec p = x;
      const double rho = std::hypot(x(0), x(1));
      p(0) = m.radius() * x(0) / rho;
      p(1) = m.radius() * x(1) / rho;
      return p;
    }
    case ModelKind::TorusOfRevolution: {
      const double rho = std::hypot(x(0), x(1));
      Vec core = zeros(3);
      core(0) = m.major_radius() * x(0) / rho;
      core(1) = m.major_radius() * x(1) / rho;
      const Vec w = x - core;
      return core + m.minor_radius() * w / w.norm();
    }
    case ModelKind::FlatTorus:
    case ModelKind::Line:
      return x;
  }
  return x;
}

Vec sphere_normal(const Vec& x) { return x / x.norm(); }

Vec cylinder_normal(const Vec& x) {
  Vec n = zeros(3);
  const double rho = std::hypot(x(0), x(1));
  n(0) = x(0) / rho;
  n(1) = x(1) / rho;
  return n;
}

Vec torus_normal(const ManifoldModel& m, const Vec& x) {
  const double rho = std::hypot(x(0), x(1));
  Vec core = zeros(3);
  core(0) = m.major_radius() * x(0) / rho;
  core(1) = m.major_radius() * x(1) / rho;
  const Vec w = x - core;
  return w / w.norm();
}

Vec unit_normal(const ManifoldModel& m, const Vec& x) {
  switch (m.kind()) {
    case ModelKind::Sphere:
      return sphere_normal(x);
    case ModelKind::Cylinder:
      return cylinder_normal(x);
    case ModelKind::TorusOfRevolution:
      return torus_normal(m, x);
    default:
      throw Error(ErrorKind::NotApplicable, "flat models have no normal direction");
  }
}

// d(a / |a|) applied to da.
Vec normalize_differential(const Vec& a, const Vec& da) {
  const double len = a.norm();
  const Vec n = a / len;
  return (da - n * n.dot(da)) / len;
}

}  // namespace

ManifoldModel::ManifoldModel(ModelKind kind, int ambient, int intrinsic, double radius,
                             double major, double eps)
    : kind_(kind),
      ambient_dim_(ambient),
      intrinsic_dim_(intrinsic),
      radius_(radius),
      major_(major),
      tubular_radius_(eps) {}

ManifoldModel ManifoldModel::sphere(double radius) {
  if (!(radius > 0)) throw Error(ErrorKind::ConfigError, "sphere radius must be positive");
  return {ModelKind::Sphere, 3, 2, radius, 0.0, radius / 2};
}

ManifoldModel ManifoldModel::cylinder(double radius) {
  if (!(radius > 0)) throw Error(ErrorKind::ConfigError, "cylinder radius must be positive");
  return {ModelKind::Cylinder, 3, 2, radius, 0.0, radius / 2};
}

ManifoldModel ManifoldModel::torus_of_revolution(double major_radius, double minor_radius) {
  if (!(minor_radius > 0)) throw Error(ErrorKind::ConfigError, "torus minor radius must be positive");
  // The inner focal distance is R - r; the r/2 tube must stay inside it.
  if (!(major_radius > 1.5 * minor_radius)) {
    throw Error(ErrorKind::ConfigError, "torus requires major radius > 1.5 * minor radius");
  }
  return {ModelKind::TorusOfRevolution, 3, 2, minor_radius, major_radius, minor_radius / 2};
}

ManifoldModel ManifoldModel::flat_torus(int dim) {
  if (dim < 1 || dim > kMaxAmbientDim) {
    throw Error(ErrorKind::ConfigError, "flat torus dimension must be in [1, 4]");
  }
  return {ModelKind::FlatTorus, dim, dim, 1.0, 0.0, kInf};
}

ManifoldModel ManifoldModel::line() { return {ModelKind::Line, 1, 1, 1.0, 0.0, kInf}; }

bool ManifoldModel::is_compact() const {
  return kind_ == ModelKind::Sphere || kind_ == ModelKind::TorusOfRevolution ||
         kind_ == ModelKind::FlatTorus;
}

double ManifoldModel::scale() const {
  switch (kind_) {
    case ModelKind::Sphere:
    case ModelKind::Cylinder:
    case ModelKind::TorusOfRevolution:
      return radius_;
    default:
      return 1.0;
  }
}

double ManifoldModel::curvature_sup() const {
  switch (kind_) {
    case ModelKind::Sphere:
      return 2.0 / (radius_ * radius_);
    case ModelKind::TorusOfRevolution:
      // Gauss curvature cos(theta) / (r (R + r cos(theta))) peaks in modulus on the inner equator.
      return 2.0 / (radius_ * (major_ - radius_));
    default:
      return 0.0;
  }
}

std::string ManifoldModel::name() const {
  std::ostringstream os;
  switch (kind_) {
    case ModelKind::Sphere:
      os << "Sphere(" << radius_ << ")";
      break;
    case ModelKind::Cylinder:
      os << "Cylinder(" << radius_ << ")";
      break;
    case ModelKind::TorusOfRevolution:
      os << "TorusOfRevolution(" << major_ << "," << radius_ << ")";
      break;
    case ModelKind::FlatTorus:
      os << "FlatTorus(" << ambient_dim_ << ")";
      break;
    case ModelKind::Line:
      os << "Line";
      break;
  }
  return os.str();
}

Vec ManifoldModel::parametrize(const Vec& params) const {
  if (params.size() != intrinsic_dim_) {
    throw Error(ErrorKind::DimensionMismatch, "parameter count must equal the intrinsic dimension");
  }
  Vec x = zeros(ambient_dim_);
  switch (kind_) {
    case ModelKind::Sphere: {
      const double polar = params(0), azimuth = params(1);
      x << radius_ * std::sin(polar) * std::cos(azimuth), radius_ * std::sin(polar) * std::sin(azimuth),
          radius_ * std::cos(polar);
      return x;
    }
    case ModelKind::Cylinder:
      x << radius_ * std::cos(params(0)), radius_ * std::sin(params(0)), params(1);
      return x;
    case ModelKind::TorusOfRevolution: {
      const double phi = params(0), theta = params(1);
      const double ring = major_ + radius_ * std::cos(theta);
      x << ring * std::cos(phi), ring * std::sin(phi), radius_ * std::sin(theta);
      return x;
    }
    case ModelKind::FlatTorus:
    case ModelKind::Line:
      return params;
  }
  return x;
}

double distance_to_manifold(const ManifoldModel& model, const Vec& x) {
  if (x.size() != model.ambient_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "point dimension differs from ambient dimension");
  }
  switch (model.kind()) {
    case ModelKind::Sphere:
      return std::abs(x.norm() - model.radius());
    case ModelKind::Cylinder:
      return std::abs(std::hypot(x(0), x(1)) - model.radius());
    case ModelKind::TorusOfRevolution: {
      const double rho = std::hypot(x(0), x(1));
      return std::abs(std::hypot(rho - model.major_radius(), x(2)) - model.minor_radius());
    }
    case ModelKind::FlatTorus:
    case ModelKind::Line:
      return 0.0;
  }
  return 0.0;
}

Vec project(const ManifoldModel& model, const Vec& x) {
  const double d = distance_to_manifold(model, x);
  if (!(d < model.tubular_radius())) {
    std::ostringstream os;
    os << "distance " << d << " to " << model.name() << " is not below epsilon "
       << model.tubular_radius();
    throw Error(ErrorKind::OutsideTubularNeighborhood, os.str());
  }
  return project_raw(model, x);
}

Mat tangent_projector(const ManifoldModel& model, const Vec& x) {
  const int q = model.ambient_dim();
  Mat p = Mat::Identity(q, q);
  if (model.is_flat()) return p;
  const Vec n = unit_normal(model, x);
  p -= n * n.transpose();
  return p;
}

Vec tangent_project(const ManifoldModel& model, const Vec& x, const Vec& v) {
  if (model.is_flat()) return v;
  const Vec n = unit_normal(model, x);
  return v - n * n.dot(v);
}

Mat tangent_frame(const ManifoldModel& model, const Vec& x) {
  const int q = model.ambient_dim();
  if (model.is_flat()) return Mat::Identity(q, q);
  Mat frame(3, 2);
  const Vec n = unit_normal(model, x);
  Vec e1 = zeros(3);
  switch (model.kind()) {
    case ModelKind::Cylinder:
    case ModelKind::TorusOfRevolution: {
      const double rho = std::hypot(x(0), x(1));
      e1 << -x(1) / rho, x(0) / rho, 0.0;
      break;
    }
    default: {
      // Sphere: Gram-Schmidt on the coordinate axis least aligned with n.
      int axis = 0;
      n.cwiseAbs().minCoeff(&axis);
      Vec a = zeros(3);
      a(axis) = 1.0;
      e1 = a - n * n.dot(a);
      e1.normalize();
      break;
    }
  }
  const Eigen::Vector3d e2 = Eigen::Vector3d(n).cross(Eigen::Vector3d(e1));
  frame.col(0) = e1;
  frame.col(1) = Vec(e2);
  return frame;
}

Vec projection_differential(const ManifoldModel& model, const Vec& x, const Vec& v) {
  switch (model.kind()) {
    case ModelKind::Sphere:
      return model.radius() * normalize_differential(x, v);
    case ModelKind::Cylinder: {
      Vec p = x, dp = v;
      p(2) = 0.0;
      dp(2) = 0.0;
      Vec out = model.radius() * normalize_differential(p, dp);
      out(2) = v(2);
      return out;
    }
    case ModelKind::TorusOfRevolution: {
      Vec p = x, dp = v;
      p(2) = 0.0;
      dp(2) = 0.0;
      const Vec core = model.major_radius() * p / p.norm();
      const Vec dcore = model.major_radius() * normalize_differential(p, dp);
      const Vec w = x - core;
      const Vec dw = v - dcore;
      return dcore + model.minor_radius() * normalize_differential(w, dw);
    }
    case ModelKind::FlatTorus:
    case ModelKind::Line:
      return v;
  }
  return v;
}

Vec second_fundamental_correction(const ManifoldModel& model, const Vec& x, const Vec& X) {
  if (model.is_flat()) return zeros(model.ambient_dim());
  const double len = X.norm();
  if (len == 0.0) return zeros(model.ambient_dim());
  // Step measured in ambient length so the stencil stays well inside the tube.
  const double step = 1e-4 * model.scale() / len;
  const Vec plus = project_raw(model, x + step * X);
  const Vec minus = project_raw(model, x - step * X);
  const Vec mid = project_raw(model, x);
  return (plus - 2.0 * mid + minus) / (step * step);
}

Vec second_fundamental_closed_form(const ManifoldModel& model, const Vec& x, const Vec& X) {
  const double r2 = model.radius() * model.radius();
  switch (model.kind()) {
    case ModelKind::Sphere:
      return -X.squaredNorm() / r2 * x;
    case ModelKind::Cylinder: {
      Vec radial = x;
      radial(2) = 0.0;
      const double planar = X(0) * X(0) + X(1) * X(1);
      return -planar / r2 * radial;
    }
    default:
      throw Error(ErrorKind::NotApplicable, "closed form available for Sphere and Cylinder only");
  }
}

Vec outward_normal(const ManifoldModel& model, const Vec& x) { return unit_normal(model, x); }

NormalResidual normal_residual(const ManifoldModel& model, const Vec& x) {
  const Vec rho = x - project(model, x);
  return {rho, rho.squaredNorm()};
}

Vec wrap(const ManifoldModel& model, const Vec& x) {
  if (!model.is_flat_quotient()) return x;
  Vec out = x;
  for (int i = 0; i < out.size(); ++i) {
    out(i) = std::fmod(out(i), kTwoPi);
    if (out(i) < 0) out(i) += kTwoPi;
  }
  return out;
}

Vec quotient_difference(const ManifoldModel& model, const Vec& a, const Vec& b) {
  Vec d = a - b;
  if (!model.is_flat_quotient()) return d;
  for (int i = 0; i < d.size(); ++i) d(i) = std::remainder(d(i), kTwoPi);
  return d;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutsideTubularNeighborhood: return "OutsideTubularNeighborhood";
    case ErrorKind::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegreeMismatch: return "DegreeMismatch";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::LeftTubularNeighborhood: return "LeftTubularNeighborhood";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::AliasedInput: return "AliasedInput";
    case ErrorKind::UnsupportedDomain: return "UnsupportedDomain";
    case ErrorKind::UnsupportedModel: return "UnsupportedModel";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::MissingNormConstants: return "MissingNormConstants";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::WrongMode: return "WrongMode";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace magflow
