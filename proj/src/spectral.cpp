#include "magflow/spectral.hpp"

#include <fftw3.h>

#include <mutex>

#include "magflow/errors.hpp"

namespace magflow {

namespace {

// The FFTW planner is not re-entrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

int fft_frequency(int j, int n) { return j <= n / 2 ? j : j - n; }

SpectralDifferentiator::SpectralDifferentiator(int n) : n_(n) {
  if (n < 4 || n % 2) throw Error(ErrorKind::ConfigError, "spectral differentiation needs an even N >= 4");
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spectrum = fftw_alloc_complex(n / 2 + 1);
  auto* work = fftw_alloc_complex(n / 2 + 1);
  spectrum_ = spectrum;
  work_ = work;
  forward_ = fftw_plan_dft_r2c_1d(n, real_, spectrum, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_c2r_1d(n, work, real_, FFTW_ESTIMATE);
}

SpectralDifferentiator::~SpectralDifferentiator() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  fftw_free(real_);
  fftw_free(spectrum_);
  fftw_free(work_);
}

void SpectralDifferentiator::differentiate(const double* values, double* first, double* second) {
  auto* spectrum = static_cast<fftw_complex*>(spectrum_);
  auto* work = static_cast<fftw_complex*>(work_);
  const int half = n_ / 2;
  for (int j = 0; j < n_; ++j) real_[j] = values[j];
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), real_, spectrum);
  const double norm = 1.0 / n_;

  // i k multiplier; Nyquist dropped.
  for (int k = 0; k <= half; ++k) {
    const double kk = k == half ? 0.0 : k;
    work[k][0] = -kk * spectrum[k][1] * norm;
    work[k][1] = kk * spectrum[k][0] * norm;
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), work, real_);
  for (int j = 0; j < n_; ++j) first[j] = real_[j];

  for (int k = 0; k <= half; ++k) {
    const double k2 = static_cast<double>(k) * k;
    work[k][0] = -k2 * spectrum[k][0] * norm;
    work[k][1] = -k2 * spectrum[k][1] * norm;
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), work, real_);
  for (int j = 0; j < n_; ++j) second[j] = real_[j];
}

namespace {

std::vector<std::complex<double>> complex_transform(const std::vector<std::complex<double>>& in, int sign) {
  const int n = static_cast<int>(in.size());
  fftw_complex* buf = nullptr;
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf = fftw_alloc_complex(n);
    plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
  }
  for (int j = 0; j < n; ++j) {
    buf[j][0] = in[j].real();
    buf[j][1] = in[j].imag();
  }
  fftw_execute(plan);
  std::vector<std::complex<double>> out(n);
  for (int j = 0; j < n; ++j) out[j] = {buf[j][0], buf[j][1]};
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
  fftw_free(buf);
  return out;
}

}  // namespace

std::vector<std::complex<double>> fourier_coefficients(const std::vector<std::complex<double>>& samples) {
  auto out = complex_transform(samples, FFTW_FORWARD);
  for (auto& c : out) c /= static_cast<double>(samples.size());
  return out;
}

std::vector<std::complex<double>> fourier_synthesis(const std::vector<std::complex<double>>& coeffs) {
  return complex_transform(coeffs, FFTW_BACKWARD);
}

}  // namespace magflow
