#include "pwsim/grid.hpp"

#include "pwsim/error.hpp"

#include <string>

namespace pwsim {

GridSpec::GridSpec(int n, double length, double m) : n_(n), length_(length), m_(m) {
  if (n < 8 || n % 2 != 0)
    throw ConfigError("grid.n must be even and >= 8 (got " + std::to_string(n) + ")", "grid.n");
  if (!(length > 0.0) || !std::isfinite(length))
    throw ConfigError("grid.length must be positive", "grid.length");
  if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("physics.m must be positive", "physics.m");
  side_ = length_ * compton_length(m_);
}

double GridSpec::wrap(double v) const {
  double w = std::fmod(v, side_);
  if (w < 0.0) w += side_;
  // fmod of a value just below zero can round up to side_.
  if (w >= side_) w -= side_;
  return w;
}

Vec2 GridSpec::separation(const Vec2 &a, const Vec2 &b) const {
  auto fold = [this](double d) {
    d = std::fmod(d, side_);
    if (d >= 0.5 * side_) d -= side_;
    if (d < -0.5 * side_) d += side_;
    return d;
  };
  return {fold(a.x - b.x), fold(a.y - b.y)};
}

double GridSpec::omega_max() const {
  const double k_axis = std::numbers::pi * n_ / side_;
  return std::sqrt(m_ * m_ + 2.0 * k_axis * k_axis);
}

}  // namespace pwsim
