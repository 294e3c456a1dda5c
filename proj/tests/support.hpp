#pragma once

#include "pwsim/field.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <span>
#include <string>

namespace pwsim::test {

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs(std::span<const double> a) {
  double d = 0.0;
  for (double v : a) d = std::max(d, std::abs(v));
  return d;
}

/// phi = cos(k.q), eta = omega sin(k.q) with k = 2 pi (jx, jy) / side.
inline FieldState plane_wave(const GridSpec &g, int jx, int jy, double amplitude = 1.0) {
  FieldState s = FieldState::zeros(g);
  const Vec2 k{kTwoPi * jx / g.side(), kTwoPi * jy / g.side()};
  const double w = dispersion_omega(k, g.mass());
  for (int iy = 0; iy < g.n(); ++iy)
    for (int ix = 0; ix < g.n(); ++ix) {
      const double ph = k.dot(g.node(ix, iy));
      const std::size_t i = static_cast<std::size_t>(iy) * g.n() + ix;
      s.phi[i] = amplitude * std::cos(ph);
      s.eta[i] = amplitude * w * std::sin(ph);
    }
  return s;
}

inline FieldState random_state(const GridSpec &g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  FieldState s = FieldState::zeros(g);
  for (auto &v : s.phi) v = nd(rng);
  for (auto &v : s.eta) v = nd(rng);
  return s;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
  const auto p = std::filesystem::temp_directory_path() / ("pwsim_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace pwsim::test
