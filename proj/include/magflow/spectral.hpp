#pragma once

#include <complex>
#include <vector>

namespace magflow {

/// Fourier differentiation of real periodic samples on N uniform nodes of
/// [0, 2 pi). Owns its FFTW plans and aligned buffers; one instance per
/// thread. The Nyquist mode is dropped from the first derivative so that it
/// stays real and odd-symmetric.
class SpectralDifferentiator {
 public:
  explicit SpectralDifferentiator(int n);
  ~SpectralDifferentiator();
  SpectralDifferentiator(const SpectralDifferentiator&) = delete;
  SpectralDifferentiator& operator=(const SpectralDifferentiator&) = delete;

  int size() const { return n_; }

  /// First and second derivatives of `values` (stride 1, length N).
  void differentiate(const double* values, double* first, double* second);

 private:
  int n_;
  double* real_;
  void* spectrum_;
  void* work_;
  void* forward_;
  void* backward_;
};

/// Discrete Fourier coefficients c_n = (1/N) sum_j f_j e^{-i n s_j}, returned in
/// FFT order (n = 0, 1, ..., N/2, -N/2+1, ..., -1).
std::vector<std::complex<double>> fourier_coefficients(const std::vector<std::complex<double>>& samples);

/// Inverse of fourier_coefficients.
std::vector<std::complex<double>> fourier_synthesis(const std::vector<std::complex<double>>& coeffs);

/// Signed frequency of FFT slot j for length N.
int fft_frequency(int j, int n);

}  // namespace magflow
