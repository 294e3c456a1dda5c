#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace pwsim {

using Complex = std::complex<double>;

/// Real-to-complex 2D transform on an n x n periodic grid (FFTW backed).
///
/// forward() is unnormalized: F[k] = sum_q f[q] exp(-i k.q).
/// inverse() includes the 1/n^2 factor, so inverse(forward(f)) == f.
/// Plans are created once per instance; the FFTW planner is serialized
/// internally so instances may be constructed from several threads.
class Fft2d {
 public:
  explicit Fft2d(int n);
  ~Fft2d();
  Fft2d(Fft2d &&) noexcept;
  Fft2d &operator=(Fft2d &&) noexcept;
  Fft2d(const Fft2d &) = delete;
  Fft2d &operator=(const Fft2d &) = delete;

  int n() const;
  void forward(std::span<const double> in, std::span<Complex> out);
  void inverse(std::span<const Complex> in, std::span<double> out);

  std::vector<Complex> forward(std::span<const double> in);
  std::vector<double> inverse(std::span<const Complex> in);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Plain 1D real DFT magnitude helper used by the signal diagnostics.
/// Returns the n/2+1 one-sided complex spectrum (unnormalized).
std::vector<Complex> real_dft(std::span<const double> in);

}  // namespace pwsim
