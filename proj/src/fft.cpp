#include "pwsim/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace pwsim {
namespace {

std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft2d::Impl {
  int n = 0;
  std::size_t real_size = 0;
  std::size_t spec_size = 0;
  double *real_buf = nullptr;
  fftw_complex *spec_buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit Impl(int n_) : n(n_) {
    real_size = static_cast<std::size_t>(n) * n;
    spec_size = static_cast<std::size_t>(n) * (n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    real_buf = fftw_alloc_real(real_size);
    spec_buf = fftw_alloc_complex(spec_size);
    fwd = fftw_plan_dft_r2c_2d(n, n, real_buf, spec_buf, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(n, n, spec_buf, real_buf, FFTW_ESTIMATE);
    if (!fwd || !inv) throw std::runtime_error("FFTW planning failed");
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real_buf);
    fftw_free(spec_buf);
  }
};

Fft2d::Fft2d(int n) : impl_(std::make_unique<Impl>(n)) {}
Fft2d::~Fft2d() = default;
Fft2d::Fft2d(Fft2d &&) noexcept = default;
Fft2d &Fft2d::operator=(Fft2d &&) noexcept = default;

int Fft2d::n() const { return impl_->n; }

void Fft2d::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != impl_->real_size || out.size() != impl_->spec_size)
    throw std::invalid_argument("Fft2d::forward: size mismatch");
  std::copy(in.begin(), in.end(), impl_->real_buf);
  fftw_execute(impl_->fwd);
  std::memcpy(static_cast<void *>(out.data()), impl_->spec_buf, impl_->spec_size * sizeof(Complex));
}

void Fft2d::inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != impl_->spec_size || out.size() != impl_->real_size)
    throw std::invalid_argument("Fft2d::inverse: size mismatch");
  // c2r overwrites its input, so always work on the internal copy.
  std::memcpy(impl_->spec_buf, in.data(), impl_->spec_size * sizeof(Complex));
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(impl_->real_size);
  for (std::size_t i = 0; i < impl_->real_size; ++i) out[i] = impl_->real_buf[i] * scale;
}

std::vector<Complex> Fft2d::forward(std::span<const double> in) {
  std::vector<Complex> out(impl_->spec_size);
  forward(in, out);
  return out;
}

std::vector<double> Fft2d::inverse(std::span<const Complex> in) {
  std::vector<double> out(impl_->real_size);
  inverse(in, out);
  return out;
}

std::vector<Complex> real_dft(std::span<const double> in) {
  const int n = static_cast<int>(in.size());
  std::vector<Complex> out(static_cast<std::size_t>(n / 2 + 1));
  if (n == 0) return out;
  double *buf;
  fftw_complex *spec;
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    buf = fftw_alloc_real(static_cast<std::size_t>(n));
    spec = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    plan = fftw_plan_dft_r2c_1d(n, buf, spec, FFTW_ESTIMATE);
  }
  std::copy(in.begin(), in.end(), buf);
  fftw_execute(plan);
  std::memcpy(static_cast<void *>(out.data()), spec, out.size() * sizeof(Complex));
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
    fftw_free(spec);
  }
  return out;
}

}  // namespace pwsim
