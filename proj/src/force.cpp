#include "magflow/force.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "magflow/errors.hpp"

namespace magflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Matrix of v -> v x b.
Eigen::Matrix3d cross_right(const Eigen::Vector3d& b) {
  Eigen::Matrix3d m;
  m << 0, b(2), -b(1), -b(2), 0, b(0), b(1), -b(0), 0;
  return m;
}

void require_model(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::UnsupportedModel, what);
}

// Orthonormal basis of Lambda^k T_x M as columns of wedge coefficients.
Eigen::MatrixXd tangent_multivector_basis(const ManifoldModel& model, const Vec& x, int k) {
  const Mat frame = tangent_frame(model, x);
  const int n = model.intrinsic_dim();
  const auto tuples = increasing_tuples(n, k);
  Eigen::MatrixXd basis(binomial(model.ambient_dim(), k), tuples.size());
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    std::vector<Eigen::VectorXd> vs;
    for (int i : tuples[t]) vs.emplace_back(frame.col(i));
    basis.col(t) = wedge(vs).coeffs;
  }
  return basis;
}

double frame_norm_of(const ManifoldModel& model, const Vec& x, const Eigen::MatrixXd& zmat, int k) {
  if (k > model.intrinsic_dim()) return 0.0;
  return (zmat * tangent_multivector_basis(model, x, k)).norm();
}

// Alternating part of w, xi -> <w, M xi>: the nearest matrix whose pairing is
// a (k+1)-form, so that skew-symmetry holds for tabulated fields.
Eigen::MatrixXd alternating_part(const Eigen::MatrixXd& m, int k) {
  const int q = static_cast<int>(m.rows());
  const auto cells = increasing_tuples(q, k + 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q, m.cols());
  for (const IndexTuple& cell : cells) {
    double omega = 0.0;
    for (int a = 0; a <= k; ++a) {
      IndexTuple rest;
      for (int b = 0; b <= k; ++b)
        if (b != a) rest.push_back(cell[b]);
      omega += (a % 2 ? -1.0 : 1.0) * m(cell[a], tuple_index(q, rest));
    }
    omega /= k + 1;
    for (int a = 0; a <= k; ++a) {
      IndexTuple rest;
      for (int b = 0; b <= k; ++b)
        if (b != a) rest.push_back(cell[b]);
      out(cell[a], tuple_index(q, rest)) = (a % 2 ? -1.0 : 1.0) * omega;
    }
  }
  return out;
}

Eigen::MatrixXd custom_blend(const ManifoldModel& model, const std::vector<ForceSample>& samples, const Vec& x) {
  const int q = static_cast<int>(x.size());
  const int count = static_cast<int>(samples.size());
  const int wanted = std::min(count, std::max(2 * (q + 1), q + 4));
  // Displacements are taken on the quotient for the flat torus.
  const bool periodic = model.is_flat_quotient();
  auto offset = [&](const Eigen::VectorXd& p) {
    Vec d = p - x;
    if (periodic)
      for (int i = 0; i < q; ++i) d(i) = std::remainder(d(i), kTwoPi);
    return d;
  };
  std::vector<std::pair<double, int>> order(count);
  for (int i = 0; i < count; ++i) order[i] = {offset(samples[i].point).squaredNorm(), i};
  std::nth_element(order.begin(), order.begin() + (wanted - 1), order.end());
  std::sort(order.begin(), order.begin() + wanted);

  const auto rows = samples.front().matrix.rows();
  const auto cols = samples.front().matrix.cols();
  const double scale2 = order[wanted - 1].first + 1e-300;
  Eigen::MatrixXd design(wanted, q + 1), values(wanted, rows * cols);
  Eigen::VectorXd weights(wanted);
  for (int r = 0; r < wanted; ++r) {
    const ForceSample& s = samples[order[r].second];
    const double w = std::sqrt(1.0 / (order[r].first / scale2 + 1e-12));
    weights(r) = w * w;
    design(r, 0) = w;
    design.row(r).tail(q) = w * offset(s.point).transpose();
    values.row(r) = w * Eigen::Map<const Eigen::RowVectorXd>(s.matrix.data(), rows * cols);
  }
  Eigen::RowVectorXd blended;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (wanted >= q + 1 && qr.rank() == q + 1) {
    blended = qr.solve(values).row(0);
  } else {
    // Too few independent samples for an affine fit: weighted mean.
    blended = Eigen::RowVectorXd::Zero(rows * cols);
    for (int r = 0; r < wanted; ++r) blended += weights(r) * values.row(r) / std::sqrt(weights(r));
    blended /= weights.sum();
  }
  return Eigen::Map<Eigen::MatrixXd>(blended.data(), rows, cols);
}

}  // namespace

ForceField::ForceField(const ManifoldModel& model, ForceKind kind, int degree)
    : model_(model), kind_(kind), degree_(degree) {}

ForceField ForceField::none(const ManifoldModel& model) {
  ForceField f(model, ForceKind::None, 1);
  f.finish();
  return f;
}

ForceField ForceField::constant_cross(const ManifoldModel& model, const Eigen::Vector3d& B) {
  require_model(model.ambient_dim() == 3, "ConstantCross needs a target in R^3");
  ForceField f(model, ForceKind::ConstantCross, 1);
  f.B_ = B;
  f.finish();
  return f;
}

ForceField ForceField::radial_cross(const ManifoldModel& model) {
  require_model(model.kind() == ModelKind::Cylinder || model.kind() == ModelKind::TorusOfRevolution,
                "RadialCross needs a Cylinder or TorusOfRevolution");
  ForceField f(model, ForceKind::RadialCross, 1);
  f.finish();
  return f;
}

ForceField ForceField::parallel_rotation(const ManifoldModel& model, double c) {
  require_model(model.kind() == ModelKind::FlatTorus && model.ambient_dim() == 2,
                "ParallelRotation needs FlatTorus(2)");
  ForceField f(model, ForceKind::ParallelRotation, 1);
  f.c_ = c;
  f.finish();
  return f;
}

ForceField ForceField::linear_scalar(const ManifoldModel& model) {
  require_model(model.kind() == ModelKind::Line, "LinearScalar needs the line model");
  ForceField f(model, ForceKind::LinearScalar, 1);
  f.finish();
  return f;
}

ForceField ForceField::parallel_volume(const ManifoldModel& model, double c) {
  require_model(model.kind() == ModelKind::FlatTorus && model.ambient_dim() == 3,
                "ParallelVolume needs FlatTorus(3)");
  ForceField f(model, ForceKind::ParallelVolume, 2);
  f.c_ = c;
  f.finish();
  return f;
}

ForceField ForceField::custom(const ManifoldModel& model, int degree, std::vector<ForceSample> samples) {
  const int q = model.ambient_dim();
  if (degree < 1 || degree > model.intrinsic_dim()) {
    throw Error(ErrorKind::DegreeOutOfRange, "custom force degree outside [1, intrinsic dimension]");
  }
  if (samples.empty()) throw Error(ErrorKind::ConfigError, "custom force needs at least one sample");
  for (const auto& s : samples) {
    if (s.point.size() != q || s.matrix.rows() != q || s.matrix.cols() != binomial(q, degree)) {
      throw Error(ErrorKind::DimensionMismatch, "custom force sample has the wrong shape");
    }
  }
  ForceField f(model, ForceKind::Custom, degree);
  f.samples_ = std::make_shared<const std::vector<ForceSample>>(std::move(samples));
  f.finish();
  return f;
}

ForceField ForceField::scaled(double factor) const {
  ForceField f = *this;
  f.factor_ *= factor;
  f.norms_.sup *= std::abs(factor);
  f.norms_.grad_sup *= std::abs(factor);
  return f;
}

void ForceField::finish() {
  const double r = model_.radius();
  const double s2 = std::sqrt(2.0);
  switch (kind_) {
    case ForceKind::None:
      norms_ = {0.0, 0.0, false};
      return;
    case ForceKind::ConstantCross:
      switch (model_.kind()) {
        case ModelKind::FlatTorus:
          norms_ = {s2 * B_.norm(), 0.0, false};
          return;
        case ModelKind::Sphere:
          // Z = -<B, n> J with J parallel, so only the normal component of B varies.
          norms_ = {s2 * B_.norm(), s2 * B_.norm() / r, false};
          return;
        case ModelKind::Cylinder: {
          const double planar = B_.head<2>().norm();
          norms_ = {s2 * planar, s2 * planar / r, false};
          return;
        }
        default:
          break;
      }
      break;
    case ForceKind::RadialCross:
      if (model_.kind() == ModelKind::Cylinder) {
        norms_ = {s2 * r, 0.0, false};
      } else {
        // <(x,y,0), n> = (R + r cos t) cos t; its derivative along the meridian
        // is -sin t (R + 2 r cos t) / r.
        const double R = model_.major_radius();
        double best = 0.0;
        constexpr int kSteps = 200000;
        for (int i = 0; i <= kSteps; ++i) {
          const double t = kPi * i / kSteps;
          best = std::max(best, std::abs(std::sin(t) * (R + 2 * r * std::cos(t))));
        }
        norms_ = {s2 * (R + r), s2 * best / r, false};
      }
      return;
    case ForceKind::ParallelRotation:
      norms_ = {s2 * std::abs(c_), 0.0, false};
      return;
    case ForceKind::LinearScalar:
      norms_ = {kInf, kInf, false};
      return;
    case ForceKind::ParallelVolume:
      norms_ = {std::sqrt(3.0) * std::abs(c_), 0.0, false};
      return;
    case ForceKind::Custom:
      break;
  }
  // Tabulated fields are costly to evaluate; a coarser grid keeps construction fast.
  norms_ = estimate_norms(*this, 12);
}

std::string ForceField::name() const {
  std::ostringstream os;
  switch (kind_) {
    case ForceKind::None: os << "None"; break;
    case ForceKind::ConstantCross:
      os << "ConstantCross(B=(" << B_(0) << "," << B_(1) << "," << B_(2) << "))";
      break;
    case ForceKind::RadialCross: os << "RadialCross"; break;
    case ForceKind::ParallelRotation: os << "ParallelRotation(c=" << c_ << ")"; break;
    case ForceKind::LinearScalar: os << "LinearScalar"; break;
    case ForceKind::ParallelVolume: os << "ParallelVolume(c=" << c_ << ")"; break;
    case ForceKind::Custom: os << "Custom(k=" << degree_ << ", samples=" << samples_->size() << ")"; break;
  }
  if (factor_ != 1.0) os << "*" << factor_;
  return os.str();
}

Eigen::MatrixXd ForceField::ambient_matrix(const Vec& x) const {
  const int q = model_.ambient_dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(q, binomial(q, degree_));
  switch (kind_) {
    case ForceKind::None:
      break;
    case ForceKind::ConstantCross:
      m = cross_right(B_);
      break;
    case ForceKind::RadialCross:
      m = cross_right(Eigen::Vector3d(x(0), x(1), 0.0));
      break;
    case ForceKind::ParallelRotation:
      m << 0, -c_, c_, 0;
      break;
    case ForceKind::LinearScalar:
      m(0, 0) = -x(0);
      break;
    case ForceKind::ParallelVolume:
      // Columns follow the basis (e1^e2, e1^e3, e2^e3).
      m << 0, 0, c_, 0, -c_, 0, c_, 0, 0;
      break;
    case ForceKind::Custom:
      m = alternating_part(custom_blend(model_, *samples_, x), degree_);
      break;
  }
  return m;
}

Eigen::MatrixXd ForceField::matrix_at(const Vec& x) const {
  const Eigen::MatrixXd m = factor_ * ambient_matrix(x);
  if (model_.is_flat()) return m;
  const Eigen::MatrixXd P = tangent_projector(model_, x);
  return P * m * compound_matrix(P, degree_);
}

Vec ForceField::apply(const Vec& x, const Vec& v) const {
  if (degree_ != 1) throw Error(ErrorKind::DegreeMismatch, "vector argument needs a 1-force");
  const int q = model_.ambient_dim();
  if (kind_ == ForceKind::None) return Vec::Zero(q);
  const Vec w = tangent_project(model_, x, v);
  Vec z(q);
  switch (kind_) {
    case ForceKind::ConstantCross:
      z = Vec(Eigen::Vector3d(w).cross(B_));
      break;
    case ForceKind::RadialCross:
      z = Vec(Eigen::Vector3d(w).cross(Eigen::Vector3d(x(0), x(1), 0.0)));
      break;
    case ForceKind::ParallelRotation:
      z(0) = -c_ * w(1);
      z(1) = c_ * w(0);
      break;
    case ForceKind::LinearScalar:
      z(0) = -x(0) * w(0);
      break;
    default:
      z = ambient_matrix(x) * Eigen::VectorXd(w);
      break;
  }
  return factor_ * tangent_project(model_, x, z);
}

double ForceField::frame_norm_at(const Vec& x) const {
  return frame_norm_of(model_, x, matrix_at(x), degree_);
}

Vec evaluate(const ForceField& field, const Vec& x, const MultiVector& xi) {
  if (xi.degree != field.degree()) throw Error(ErrorKind::DegreeMismatch, "multivector degree differs from force degree");
  if (xi.dim != field.model().ambient_dim()) throw Error(ErrorKind::DimensionMismatch, "multivector not in ambient space");
  return Vec(field.matrix_at(x) * xi.coeffs);
}

double cutoff(double distance, double eps) {
  if (!std::isfinite(eps) || distance <= eps / 4) return 1.0;
  if (distance >= eps / 2) return 0.0;
  const double t = (distance - eps / 4) / (eps / 4);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

Vec extend_vector(const ForceField& field, const Vec& x, const Vec& v) {
  const ManifoldModel& model = field.model();
  if (model.is_flat()) return field.apply(x, v);
  const double psi = cutoff(distance_to_manifold(model, x), model.tubular_radius());
  if (psi == 0.0) return Vec::Zero(model.ambient_dim());
  return psi * field.apply(project(model, x), projection_differential(model, x, v));
}

Vec extend(const ForceField& field, const Vec& x, const MultiVector& xi) {
  const ManifoldModel& model = field.model();
  const int q = model.ambient_dim();
  if (xi.degree != field.degree()) throw Error(ErrorKind::DegreeMismatch, "multivector degree differs from force degree");
  const double psi = model.is_flat() ? 1.0 : cutoff(distance_to_manifold(model, x), model.tubular_radius());
  if (psi == 0.0) return Vec::Zero(q);
  Eigen::MatrixXd jac(q, q);
  for (int i = 0; i < q; ++i) jac.col(i) = projection_differential(model, x, Vec::Unit(q, i));
  const MultiVector pushed{q, xi.degree, compound_matrix(jac, xi.degree) * xi.coeffs};
  const Vec base = model.is_flat() ? x : project(model, x);
  return psi * evaluate(field, base, pushed);
}

ClosednessReport check_closedness(const ForceField& field, int sample_count, std::uint64_t seed) {
  const ManifoldModel& model = field.model();
  const int k = field.degree();
  const int n = model.intrinsic_dim();
  if (k + 1 >= n) return {0.0, true};
  if (!model.is_flat()) {
    throw Error(ErrorKind::NotApplicable, "finite-difference closedness check needs a flat model");
  }
  const auto faces = increasing_tuples(n, k + 1);
  const auto cells = increasing_tuples(n, k + 2);
  // Omega_J = <e_{J0}, Z(e_{J1} ^ ... ^ e_{Jk})> for increasing J.
  auto omega = [&](const Vec& x) {
    const Eigen::MatrixXd m = field.matrix_at(x);
    Eigen::VectorXd out(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const IndexTuple rest(faces[f].begin() + 1, faces[f].end());
      out(f) = m(faces[f][0], tuple_index(n, rest));
    }
    return out;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.5, kTwoPi - 0.5);
  const double step = 1e-4;
  double worst = 0.0;
  for (int s = 0; s < sample_count; ++s) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = coord(rng);
    std::vector<Eigen::VectorXd> partial(n);
    for (int i = 0; i < n; ++i) {
      const Vec e = Vec::Unit(n, i) * step;
      partial[i] = (omega(x + e) - omega(x - e)) / (2 * step);
    }
    double norm2 = 0.0;
    for (const IndexTuple& cell : cells) {
      double d = 0.0;
      for (int a = 0; a < k + 2; ++a) {
        IndexTuple face;
        for (int b = 0; b < k + 2; ++b)
          if (b != a) face.push_back(cell[b]);
        d += (a % 2 ? -1.0 : 1.0) * partial[cell[a]](tuple_index(n, face));
      }
      norm2 += d * d;
    }
    worst = std::max(worst, std::sqrt(norm2));
  }
  return {worst, false};
}

std::vector<Vec> sample_manifold(const ManifoldModel& model, int samples_per_dim) {
  const int n = model.intrinsic_dim();
  const int per = std::max(2, std::min(samples_per_dim, static_cast<int>(std::pow(20000.0, 1.0 / n))));
  std::vector<Vec> out;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec params(n);
    for (int i = 0; i < n; ++i) {
      const double u = (idx[i] + 0.5) / per;
      switch (model.kind()) {
        case ModelKind::Sphere:
          params(i) = i == 0 ? kPi * u : kTwoPi * u;
          break;
        case ModelKind::Cylinder:
          params(i) = i == 0 ? kTwoPi * u : 4.0 * u - 2.0;
          break;
        case ModelKind::Line:
          params(i) = 10.0 * u - 5.0;
          break;
        default:
          params(i) = kTwoPi * u;
          break;
      }
    }
    out.push_back(model.parametrize(params));
    int d = 0;
    while (d < n && ++idx[d] == per) idx[d++] = 0;
    if (d == n) break;
  }
  return out;
}

NormConstants estimate_norms(const ForceField& field, int samples_per_dim) {
  const ManifoldModel& model = field.model();
  const int k = field.degree();
  const double step = 1e-4 * model.scale();
  NormConstants out{0.0, 0.0, true};
  for (const Vec& x : sample_manifold(model, samples_per_dim)) {
    out.sup = std::max(out.sup, field.frame_norm_at(x));
    // Covariant derivative of the tangential field: project the ambient
    // derivative of P Zhat P back onto the tangent bundle.
    const Mat frame = tangent_frame(model, x);
    const Eigen::MatrixXd basis = tangent_multivector_basis(model, x, k);
    const Eigen::MatrixXd P = tangent_projector(model, x);
    double grad2 = 0.0;
    for (int i = 0; i < model.intrinsic_dim(); ++i) {
      const Vec e = frame.col(i);
      const Vec xp = model.is_flat() ? Vec(x + step * e) : project(model, x + step * e);
      const Vec xm = model.is_flat() ? Vec(x - step * e) : project(model, x - step * e);
      const Eigen::MatrixXd d = (field.matrix_at(xp) - field.matrix_at(xm)) / (2 * step);
      grad2 += (P * d * basis).squaredNorm();
    }
    out.grad_sup = std::max(out.grad_sup, std::sqrt(grad2));
  }
  return out;
}

double sup_difference(const ForceField& a, const ForceField& b, int samples_per_dim) {
  if (a.degree() != b.degree()) throw Error(ErrorKind::DegreeMismatch, "forces of different degree");
  double worst = 0.0;
  for (const Vec& x : sample_manifold(a.model(), samples_per_dim)) {
    worst = std::max(worst, frame_norm_of(a.model(), x, a.matrix_at(x) - b.matrix_at(x), a.degree()));
  }
  return worst;
}

std::vector<ForceSample> load_force_samples(const std::string& path, int ambient_dim, int degree) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open force samples file " + path);
  const int cols = binomial(ambient_dim, degree);
  const std::size_t expected = ambient_dim + ambient_dim * cols;
  std::vector<ForceSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (values.empty()) continue;
    if (values.size() != expected) {
      throw Error(ErrorKind::ConfigError, path + ":" + std::to_string(lineno) + ": expected " +
                                              std::to_string(expected) + " numbers");
    }
    ForceSample s{Eigen::VectorXd(ambient_dim), Eigen::MatrixXd(ambient_dim, cols)};
    for (int i = 0; i < ambient_dim; ++i) s.point(i) = values[i];
    for (int r = 0; r < ambient_dim; ++r)
      for (int c = 0; c < cols; ++c) s.matrix(r, c) = values[ambient_dim + r * cols + c];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace magflow
