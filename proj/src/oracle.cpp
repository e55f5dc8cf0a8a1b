#include "magflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magflow/spectral.hpp"

namespace magflow {

namespace {

const Complex kI{0.0, 1.0};

double permutation_sign(const std::vector<int>& p) {
  int inversions = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inversions;
  return inversions % 2 ? -1.0 : 1.0;
}

MultiVector leibniz_wedge(const std::vector<Eigen::VectorXd>& w) {
  const int q = static_cast<int>(w.front().size());
  const int k = static_cast<int>(w.size());
  MultiVector out = MultiVector::zero(q, k);
  const auto tuples = increasing_tuples(q, k);
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double sum = 0.0;
    do {
      double term = permutation_sign(perm);
      for (int a = 0; a < k; ++a) term *= w[a](tuples[t][perm[a]]);
      sum += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.coeffs(t) = sum;
  }
  return out;
}

int winding_of(const Eigen::VectorXd& phi) {
  const int n = static_cast<int>(phi.size());
  // Samples stop one node short of 2 pi; rescale the observed increment.
  const double increment = (phi(n - 1) - phi(0)) * n / (n - 1.0);
  return static_cast<int>(std::lround(increment / kTwoPi));
}

}  // namespace

CylinderFourierState decompose(const Eigen::VectorXd& phi0, const Eigen::VectorXd& z0, int n_max,
                               double alias_tolerance) {
  const int n = static_cast<int>(phi0.size());
  if (z0.size() != n) throw Error(ErrorKind::DimensionMismatch, "phi and z sampled on different grids");
  if (n < 4) throw Error(ErrorKind::ConfigError, "need at least 4 samples");
  if (n_max < 0) n_max = n / 2 - 1;
  CylinderFourierState state;
  state.winding = winding_of(phi0);
  std::vector<Complex> samples(n);
  for (int j = 0; j < n; ++j) samples[j] = {phi0(j) - state.winding * kTwoPi * j / n, z0(j)};
  const auto coeffs = fourier_coefficients(samples);
  double tail = 0.0;
  for (int j = 0; j < n; ++j) {
    const int freq = fft_frequency(j, n);
    if (std::abs(freq) <= n_max && freq != n / 2) {
      state.modes[freq] = coeffs[j];
    } else {
      tail += std::norm(coeffs[j]);
    }
  }
  if (tail > alias_tolerance) {
    throw Error(ErrorKind::AliasedInput, "energy " + std::to_string(tail) + " above the retained band");
  }
  return state;
}

CylinderFourierState evolve(const CylinderFourierState& state, double duration) {
  CylinderFourierState out = state;
  out.t = state.t + duration;
  for (auto& [n, c] : out.modes) c *= std::exp(-static_cast<double>(n * n + n) * duration);
  out.modes[0] += kI * static_cast<double>(state.winding) * duration;
  return out;
}

Complex reconstruct(const CylinderFourierState& state, double s) {
  Complex xi = static_cast<double>(state.winding) * s;
  for (const auto& [n, c] : state.modes) xi += c * std::exp(kI * (n * s));
  return xi;
}

std::vector<Complex> reconstruct_samples(const CylinderFourierState& state, int nodes) {
  std::vector<Complex> out(nodes);
  for (int j = 0; j < nodes; ++j) out[j] = reconstruct(state, kTwoPi * j / nodes);
  return out;
}

std::vector<Complex> oracle_residual(const CylinderFourierState& state, int nodes) {
  std::vector<Complex> out(nodes, kI * static_cast<double>(state.winding));
  for (int j = 0; j < nodes; ++j) {
    const double s = kTwoPi * j / nodes;
    for (const auto& [n, c] : state.modes) out[j] += c * static_cast<double>(-n * n - n) * std::exp(kI * (n * s));
  }
  return out;
}

std::vector<std::vector<Complex>> series_coefficients(const std::vector<Complex>& a0, int n_terms) {
  if (n_terms < 0 || n_terms > 25) throw Error(ErrorKind::DegreeOutOfRange, "series limited to 25 terms");
  const int n = static_cast<int>(a0.size());
  Eigen::VectorXd phi(n), z(n);
  for (int j = 0; j < n; ++j) {
    phi(j) = a0[j].real();
    z(j) = a0[j].imag();
  }
  const CylinderFourierState base = decompose(phi, z);
  std::vector<std::vector<Complex>> out{a0};
  // Spectral coefficients of the periodic part of a_m; the linear part w s
  // of a_0 only feeds the constant i w into a_1.
  std::vector<Complex> coeffs(n, 0.0);
  for (const auto& [freq, c] : base.modes) coeffs[(freq + n) % n] = c;
  for (int m = 1; m <= n_terms; ++m) {
    for (int j = 0; j < n; ++j) {
      const double k = fft_frequency(j, n);
      coeffs[j] *= (-k * k - k) / m;
    }
    if (m == 1) coeffs[0] += kI * static_cast<double>(base.winding);
    out.push_back(fourier_synthesis(coeffs));
  }
  return out;
}

LoopState embed_cylinder(const CylinderFourierState& state, int nodes, double radius) {
  if (radius != 1.0) throw Error(ErrorKind::UnsupportedModel, "the closed-form solution lives on the unit cylinder");
  Eigen::MatrixXd pos(3, nodes);
  const auto xi = reconstruct_samples(state, nodes);
  for (int j = 0; j < nodes; ++j) pos.col(j) << std::cos(xi[j].real()), std::sin(xi[j].real()), xi[j].imag();
  return LoopState::from_nodes(pos, state.t);
}

std::vector<Complex> complexify(const LoopState& state, const Eigen::MatrixXd& vectors) {
  std::vector<Complex> out(state.nodes());
  for (int j = 0; j < state.nodes(); ++j) {
    const double x = state.positions(0, j), y = state.positions(1, j);
    const double rho = std::hypot(x, y);
    out[j] = {(-y * vectors(0, j) + x * vectors(1, j)) / rho, vectors(2, j)};
  }
  return out;
}

double blow_up_residual(double T, const std::vector<double>& s_grid, const std::vector<double>& t_grid) {
  double worst = 0.0;
  for (double t : t_grid) {
    const double inv = 1.0 / (T - t);
    for (double s : s_grid) {
      const double u = s * inv;
      const double du = inv;
      const double ddu = 0.0;
      const double dt = s * inv * inv;
      worst = std::max(worst, std::abs(ddu + u * du - dt));
    }
  }
  return worst;
}

double blow_up_residual_fd(double T, double half_length, int nodes, double t) {
  const double h = 2 * half_length / (nodes - 1);
  auto u = [T](double s, double tt) { return s / (T - tt); };
  double worst = 0.0;
  for (int j = 1; j < nodes - 1; ++j) {
    const double s = -half_length + j * h;
    const double du = (u(s + h, t) - u(s - h, t)) / (2 * h);
    const double ddu = (u(s + h, t) - 2 * u(s, t) + u(s - h, t)) / (h * h);
    const double dt = (u(s, t + h) - u(s, t - h)) / (2 * h);
    worst = std::max(worst, std::abs(ddu + u(s, t) * du - dt));
  }
  return worst;
}

MultiVector brute_force_tilde_wedge(const std::vector<Eigen::MatrixXd>& maps,
                                    const std::vector<Eigen::VectorXd>& vectors) {
  const int k = static_cast<int>(maps.size());
  if (static_cast<int>(vectors.size()) != k) throw Error(ErrorKind::DegreeMismatch, "need one vector per map");
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  MultiVector total = MultiVector::zero(static_cast<int>(maps.front().rows()), k);
  do {
    std::vector<Eigen::VectorXd> images;
    for (int a = 0; a < k; ++a) images.push_back(maps[a] * vectors[perm[a]]);
    total = total + leibniz_wedge(images) * permutation_sign(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

MultiVector brute_force_power(const Eigen::MatrixXd& A, const std::vector<Eigen::VectorXd>& vectors) {
  std::vector<Eigen::VectorXd> images;
  for (const auto& v : vectors) images.push_back(A * v);
  return leibniz_wedge(images);
}

}  // namespace magflow
