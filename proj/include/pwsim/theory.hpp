#pragma once

#include <array>
#include <functional>
#include <utility>

namespace pwsim::theory {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  double norm() const;
};

/// Modified Bessel function K0: power series below x = 2, trapezoidal
/// quadrature of the integral exp(-x cosh t) on [2, 25), asymptotic series
/// from 25 on. Relative error below 1e-12 over (0, 700).
double bessel_k0(double x);
double bessel_j1(double x);

/// Lorentz factor of a speed; throws for |u| >= 1.
double lorentz_gamma(double u);

/// b exp(-m R) / (4 pi m R) with R = sqrt(gamma^2 (x - u t)^2 + y^2 + z^2).
double yukawa_packet_3d(const Vec3 &q, double t, double u, double b, double m);

/// b K0(m r) / (2 pi m): static field of (-lap + m^2) phi = (b/m) delta^2.
double static_profile_2d(double r, double b, double m);

/// Static field of the Gaussian-smoothed source with per-axis `variance`,
/// evaluated through its heat-kernel integral.
double smoothed_static_profile_2d(double r, double b, double m, double variance);

/// Retarded Green's function of the Klein-Gordon operator in 3+1D. The
/// light-cone shell theta(t) delta(t - |q|) / (4 pi |q|) is returned as its
/// radius and weight; `regular` is -(m^2/2 pi) J1(m s)/(m s) inside the cone.
struct GreenValue {
  double shell_radius = 0.0;  // |q| = t when the shell is present
  double shell_weight = 0.0;  // 1/(4 pi |q|), zero when t <= 0
  double regular = 0.0;
};
GreenValue green_function(const Vec3 &q, double t, double m);

/// 2 pi / (m |g|); throws for g = 0.
double de_broglie_wavelength(double g, double m = 1.0);
/// omega_c / gamma.
double zitter_frequency(double u, double m = 1.0);
/// gamma (1 + u^2) omega_c.
double max_frequency(double u, double m = 1.0);

struct Wavefront {
  double center = 0.0;         // along the direction of u0
  double semi_inline = 0.0;    // contracted axis
  double semi_transverse = 0.0;
  double u_source = 0.0;
  double u_expansion = 0.0;
};
/// Wavefront emitted by a source moving at u0 whose rest-frame sphere
/// expands at v, at lab time t.
Wavefront wavefront(double u0, double v, double t);

inline constexpr double kVirtualMassScale = 163.8;
/// (b / 163.8)^2.
double virtual_mass(double b);
double effective_mass(double b, double m);

/// delta m / m of the rigid 2D packet carried by a particle whose source is
/// a Gaussian of per-axis `variance`: m/(4 pi) (b/m)^2 integral k^3 G^2 / (k^2+m^2)^2 dk.
double virtual_mass_2d(double b, double m, double variance);

struct FitRow {
  double b, e_b, n_b;
};
/// Amplitude-scaling constants per coupling.
const std::array<FitRow, 6> &fit_constants();
/// Linear interpolation in b; throws outside the table.
std::pair<double, double> interpolate_fit(double b);

/// 1/2 (m_eff/m) gamma^(4 - 2 e_b) / n_b^2 using the tabulated e_b, n_b.
double uncertainty_bound(double b, double gamma);
double uncertainty_bound(double b, double gamma, double e_b, double n_b);

struct Rescaled {
  double b_tilde = 0.0;
  double b_prime = 0.0;
};
/// b~ = b (1 - v/s)/(1 + v s), b' = sqrt(b~ b). When b~ has the opposite sign
/// to b, b' carries that sign: sign(b~) sqrt(|b~ b|).
Rescaled coupling_rescale(double b, double v, double s);

using Field3 = std::function<double(const Vec3 &)>;

/// Regular part at `qp` of a field with a 1/R point singularity: the limit of
/// the spherical average of d_r(r phi) as r -> 0, by quadrature at radii
/// r0, r0/2, ... and polynomial extrapolation to r = 0.
double continuous_component(const Field3 &phi, const Vec3 &qp, double r0 = 0.05);

/// Same for phi = phi1 + a / sqrt(x^T A x), x = q - qp, with A symmetric
/// positive definite (row-major).
double continuous_component(double a, const std::array<double, 9> &A, const Field3 &phi1, const Vec3 &qp = {},
                            double r0 = 0.05);

}  // namespace pwsim::theory
