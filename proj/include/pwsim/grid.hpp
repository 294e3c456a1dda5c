#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

namespace pwsim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return a *= 1.0 / s; }
  friend constexpr bool operator==(const Vec2 &, const Vec2 &) = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double norm2() const { return x * x + y * y; }
  constexpr double dot(const Vec2 &o) const { return x * o.x + y * o.y; }
  constexpr double cross(const Vec2 &o) const { return x * o.y - y * o.x; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

// Compton wavelength and period coincide in natural units (c = 1).
inline double compton_length(double m) { return kTwoPi / m; }
inline double compton_period(double m) { return kTwoPi / m; }

/// Square periodic grid. `length` is the side in Compton wavelengths; all
/// derived quantities (spacing, wavenumbers, node positions) are in natural
/// units where the field mass `m` sets the scale. Node (ix, iy) sits at
/// (ix * h, iy * h) on [0, side)^2 and is stored row-major with x fastest.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int n, double length, double m = 1.0);

  int n() const { return n_; }
  double length() const { return length_; }
  double mass() const { return m_; }
  double side() const { return side_; }
  double spacing() const { return side_ / n_; }
  double cell_area() const { return spacing() * spacing(); }
  std::size_t nodes() const { return static_cast<std::size_t>(n_) * n_; }

  // r2c half spectrum: n rows (ky) by n/2+1 columns (kx).
  int half() const { return n_ / 2 + 1; }
  std::size_t modes() const { return static_cast<std::size_t>(n_) * half(); }

  /// Signed wavenumber of FFT bin j (0 <= j < n). The Nyquist bin j = n/2
  /// maps to -pi/h in rows and is the last column of the half spectrum.
  double wavenumber(int j) const {
    const int s = j < n_ / 2 ? j : j - n_;
    return kTwoPi * s / side_;
  }
  bool is_nyquist(int j) const { return j == n_ / 2; }

  Vec2 node(int ix, int iy) const { return {ix * spacing(), iy * spacing()}; }
  Vec2 center() const { return {0.5 * side_, 0.5 * side_}; }
  double wrap(double v) const;
  Vec2 wrap(const Vec2 &q) const { return {wrap(q.x), wrap(q.y)}; }
  /// Minimum-image displacement a - b.
  Vec2 separation(const Vec2 &a, const Vec2 &b) const;

  double omega_max() const;
  /// Largest timestep (natural units) accepted by the field integrator.
  double max_stable_dt() const { return 0.5 / omega_max(); }

  friend bool operator==(const GridSpec &, const GridSpec &) = default;

 private:
  int n_ = 0;
  double length_ = 0.0;
  double m_ = 1.0;
  double side_ = 0.0;
};

}  // namespace pwsim
