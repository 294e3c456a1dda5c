#include "pwsim/theory.hpp"

#include "pwsim/error.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwsim::theory {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.57721566490153286061;

double k0_series(double x) {
  const double y = 0.25 * x * x;
  double term = 1.0, i0 = 1.0, tail = 0.0, harmonic = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= y / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    i0 += term;
    tail += term * harmonic;
    if (term * harmonic < 1e-18 * std::abs(tail)) break;
  }
  return -(std::log(0.5 * x) + kEulerGamma) * i0 + tail;
}

// exp(x) K0(x) by the trapezoidal rule on the integral of exp(-x (cosh t - 1)).
double k0_scaled_quadrature(double x) {
  const double h = 0.02;
  double sum = 0.5;  // t = 0 term
  for (int i = 1;; ++i) {
    const double t = i * h;
    const double v = std::exp(-x * (std::cosh(t) - 1.0));
    sum += v;
    if (v < 1e-18 * sum) break;
  }
  return sum * h;
}

double k0_asymptotic(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * -((2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17) break;
  }
  return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * sum;
}

// Composite Simpson rule with an even number of intervals.
template <class F>
double simpson(F &&f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

void check_speed(double u, const char *name) {
  if (!std::isfinite(u) || std::abs(u) >= 1.0)
    throw ConfigError(std::string(name) + " must be sub-luminal (got " + std::to_string(u) + ")");
}

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

double bessel_k0(double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k0 requires x > 0");
  if (x < 2.0) return k0_series(x);
  if (x < 25.0) return std::exp(-x) * k0_scaled_quadrature(x);
  return k0_asymptotic(x);
}

double bessel_j1(double x) { return x < 0.0 ? -std::cyl_bessel_j(1.0, -x) : std::cyl_bessel_j(1.0, x); }

double lorentz_gamma(double u) {
  check_speed(u, "speed");
  return 1.0 / std::sqrt(1.0 - u * u);
}

double yukawa_packet_3d(const Vec3 &q, double t, double u, double b, double m) {
  const double g = lorentz_gamma(u);
  const double xi = g * (q.x - u * t);
  const double R = std::sqrt(xi * xi + q.y * q.y + q.z * q.z);
  if (R == 0.0) throw std::domain_error("yukawa_packet_3d is singular at the particle");
  return b * std::exp(-m * R) / (4.0 * kPi * m * R);
}

double static_profile_2d(double r, double b, double m) {
  if (!(r > 0.0)) throw std::domain_error("static_profile_2d requires r > 0");
  return b * bessel_k0(m * r) / (2.0 * kPi * m);
}

double smoothed_static_profile_2d(double r, double b, double m, double variance) {
  if (!(r >= 0.0)) throw std::domain_error("smoothed_static_profile_2d requires r >= 0");
  if (!(variance > 0.0)) throw std::domain_error("variance must be positive");
  // Heat-kernel form: positive integrand in x = ln(s / variance), no cancellation in the tail.
  const double a = 0.5 * m * m * variance;
  const double c = 0.5 * r * r / variance;
  const double upper = std::log(1500.0 / a + 1.0);
  const int n = std::max(20000, static_cast<int>(2000.0 * upper)) & ~1;
  auto f = [&](double x) {
    const double e = std::exp(x);
    return std::exp(-a * (e - 1.0) - c / e);
  };
  return b / (4.0 * kPi * m) * simpson(f, 0.0, upper, n);
}

GreenValue green_function(const Vec3 &q, double t, double m) {
  GreenValue g;
  if (t <= 0.0) return g;
  const double r = q.norm();
  if (r > 0.0) {
    g.shell_radius = t;
    g.shell_weight = 1.0 / (4.0 * kPi * r);
  }
  if (t > r) {
    const double ms = m * std::sqrt(t * t - r * r);
    const double ratio = ms < 1e-4 ? 0.5 - ms * ms / 16.0 : bessel_j1(ms) / ms;
    g.regular = -(m * m / (2.0 * kPi)) * ratio;
  }
  return g;
}

double de_broglie_wavelength(double g, double m) {
  if (g == 0.0) throw std::domain_error("de Broglie wavelength is infinite at zero momentum");
  return 2.0 * kPi / (m * std::abs(g));
}

double zitter_frequency(double u, double m) { return m / lorentz_gamma(u); }

double max_frequency(double u, double m) { return lorentz_gamma(u) * (1.0 + u * u) * m; }

Wavefront wavefront(double u0, double v, double t) {
  check_speed(u0, "u0");
  if (!std::isfinite(v) || std::abs(v) > 1.0) throw ConfigError("v must not exceed c (got " + std::to_string(v) + ")");
  if (!(t >= 0.0)) throw std::domain_error("wavefront requires t >= 0");
  const double d = 1.0 - u0 * u0 * v * v;
  const double contraction = std::sqrt((1.0 - u0 * u0) / d);
  Wavefront w;
  w.u_source = (1.0 - v * v) / d * u0;
  w.u_expansion = v * contraction;
  w.center = w.u_source * t;
  w.semi_transverse = w.u_expansion * t;
  w.semi_inline = contraction * w.semi_transverse;
  return w;
}

double virtual_mass(double b) {
  if (!(b >= 0.0)) throw std::domain_error("coupling must be >= 0");
  const double r = b / kVirtualMassScale;
  return r * r;
}

double effective_mass(double b, double m) { return m * (1.0 + virtual_mass(b)); }

double virtual_mass_2d(double b, double m, double variance) {
  if (!(variance > 0.0)) throw std::domain_error("variance must be positive");
  const double kmax = std::sqrt(60.0 / variance);
  auto f = [&](double k) {
    const double d = k * k + m * m;
    return k * k * k * std::exp(-variance * k * k) / (d * d);
  };
  return b * b / (4.0 * kPi * m) * simpson(f, 0.0, kmax, 20000);
}

const std::array<FitRow, 6> &fit_constants() {
  static const std::array<FitRow, 6> rows{{{13.3, 3.88, 238.0},
                                           {26.7, 3.52, 69.0},
                                           {40.0, 2.87, 39.0},
                                           {53.3, 2.38, 28.0},
                                           {66.7, 2.10, 23.0},
                                           {80.0, 1.97, 21.0}}};
  return rows;
}

std::pair<double, double> interpolate_fit(double b) {
  const auto &rows = fit_constants();
  if (!(b >= rows.front().b && b <= rows.back().b))
    throw std::domain_error("b = " + std::to_string(b) + " lies outside the fitted range [13.3, 80]");
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (b <= rows[i + 1].b) {
      const double s = (b - rows[i].b) / (rows[i + 1].b - rows[i].b);
      return {rows[i].e_b + s * (rows[i + 1].e_b - rows[i].e_b), rows[i].n_b + s * (rows[i + 1].n_b - rows[i].n_b)};
    }
  }
  return {rows.back().e_b, rows.back().n_b};
}

double uncertainty_bound(double b, double gamma, double e_b, double n_b) {
  if (!(gamma >= 1.0)) throw std::domain_error("gamma must be >= 1");
  if (!(n_b > 0.0)) throw std::domain_error("n_b must be positive");
  return 0.5 * (1.0 + virtual_mass(b)) * std::pow(gamma, 4.0 - 2.0 * e_b) / (n_b * n_b);
}

double uncertainty_bound(double b, double gamma) {
  const auto [e_b, n_b] = interpolate_fit(b);
  return uncertainty_bound(b, gamma, e_b, n_b);
}

Rescaled coupling_rescale(double b, double v, double s) {
  check_speed(v, "boost speed");
  if (s == 0.0) throw std::domain_error("wave group speed must be nonzero");
  check_speed(s, "wave group speed");
  Rescaled r;
  r.b_tilde = b * (1.0 - v / s) / (1.0 + v * s);
  const double p = r.b_tilde * b;
  r.b_prime = std::copysign(std::sqrt(std::abs(p)), r.b_tilde);
  return r;
}

double continuous_component(const Field3 &phi, const Vec3 &qp, double r0) {
  if (!(r0 > 0.0)) throw std::domain_error("r0 must be positive");
  static const auto gl = gauss_legendre(16);
  constexpr int kAzimuth = 32;
  constexpr int kLevels = 6;

  // Spherical average of d_r(r phi) at radius r, by central differences.
  auto shell = [&](double r) {
    const double dr = 1e-3 * r;
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.first.size(); ++i) {
      const double mu = gl.first[i];
      const double st = std::sqrt(1.0 - mu * mu);
      double ring = 0.0;
      for (int j = 0; j < kAzimuth; ++j) {
        const double az = 2.0 * kPi * j / kAzimuth;
        const Vec3 xi{st * std::cos(az), st * std::sin(az), mu};
        auto rp = [&](double rr) { return rr * phi(Vec3{qp.x + rr * xi.x, qp.y + rr * xi.y, qp.z + rr * xi.z}); };
        ring += (rp(r + dr) - rp(r - dr)) / (2.0 * dr);
      }
      acc += gl.second[i] * ring / kAzimuth;
    }
    return 0.5 * acc;
  };

  // Neville extrapolation to r = 0.
  std::array<double, kLevels> r{}, p{};
  for (int k = 0; k < kLevels; ++k) {
    r[k] = r0 / std::pow(2.0, k);
    p[k] = shell(r[k]);
  }
  for (int level = 1; level < kLevels; ++level)
    for (int k = kLevels - 1; k >= level; --k) p[k] = (r[k - level] * p[k] - r[k] * p[k - 1]) / (r[k - level] - r[k]);
  return p[kLevels - 1];
}

double continuous_component(double a, const std::array<double, 9> &A, const Field3 &phi1, const Vec3 &qp, double r0) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(A[3 * i + j] - A[3 * j + i]) > 1e-12 * (std::abs(A[3 * i + j]) + std::abs(A[3 * j + i])))
        throw std::domain_error("A must be symmetric");
  // Leading principal minors must be positive.
  const double m1 = A[0];
  const double m2 = A[0] * A[4] - A[1] * A[3];
  const double m3 = A[0] * (A[4] * A[8] - A[5] * A[7]) - A[1] * (A[3] * A[8] - A[5] * A[6]) +
                    A[2] * (A[3] * A[7] - A[4] * A[6]);
  if (!(m1 > 0.0 && m2 > 0.0 && m3 > 0.0)) throw std::domain_error("A must be positive definite");
  auto phi = [&](const Vec3 &q) {
    const double x = q.x - qp.x, y = q.y - qp.y, z = q.z - qp.z;
    const double quad = x * (A[0] * x + A[1] * y + A[2] * z) + y * (A[3] * x + A[4] * y + A[5] * z) +
                        z * (A[6] * x + A[7] * y + A[8] * z);
    return phi1(q) + a / std::sqrt(quad);
  };
  return continuous_component(Field3(phi), qp, r0);
}

}  // namespace pwsim::theory
