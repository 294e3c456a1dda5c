#pragma once

#include "pwsim/fft.hpp"
#include "pwsim/grid.hpp"
#include "pwsim/particle.hpp"

#include <span>
#include <vector>

namespace pwsim {

/// Klein-Gordon dispersion sqrt(m^2 + |k|^2).
double dispersion_omega(const Vec2 &k, double m);
/// k / sqrt(m^2 + |k|^2); always sub-luminal.
Vec2 group_velocity(const Vec2 &k, double m);

/// Real field and its time derivative on the nodes of `grid` (row-major,
/// x fastest). Time is in natural units.
struct FieldState {
  GridSpec grid;
  std::vector<double> phi;
  std::vector<double> eta;
  double time = 0.0;

  static FieldState zeros(const GridSpec &grid);
  bool finite() const;
};

/// Half-spectrum representation of a FieldState (unnormalized FFT
/// coefficients, see Fft2d).
struct SpectralField {
  GridSpec grid;
  std::vector<Complex> phi;
  std::vector<Complex> eta;
  double time = 0.0;

  static SpectralField zeros(const GridSpec &grid);
};

SpectralField to_spectral(const FieldState &f, Fft2d &fft);
FieldState to_grid(const SpectralField &s, Fft2d &fft);

/// Per-mode tables shared by the field integrators and samplers.
struct ModeTable {
  GridSpec grid;
  std::vector<double> kx;       // per column, size n/2+1 (Nyquist column is +pi/h)
  std::vector<double> ky;       // per row, size n
  std::vector<double> weight;   // per column: 1 for self-conjugate columns, 2 otherwise
  std::vector<double> omega2;   // per mode: m^2 + |k|^2 (Nyquist included)
  std::vector<double> kernel;   // per mode: exp(-variance |k|^2 / 2), zero on Nyquist bins

  ModeTable(const GridSpec &grid, double source_variance);
  std::size_t index(int jy, int jx) const { return static_cast<std::size_t>(jy) * kx.size() + jx; }
  bool derivative_zero(int jy, int jx) const { return grid.is_nyquist(jy) || grid.is_nyquist(jx); }
};

/// Gaussian variance 2/m^2 used for the regularized point source.
inline double default_source_variance(double m) { return 2.0 / (m * m); }

struct SourceSpec {
  Vec2 center;
  double amplitude = 0.0;  // integral of the gridded source
  double variance = 2.0;   // per-axis Gaussian variance

  void validate() const;
};

/// Source of a particle with coupling b: amplitude b/(m gamma).
SourceSpec source_for(const ParticleState &p, double b, double m, double variance);

/// Periodically wrapped normalized Gaussian times `amplitude`, on the nodes.
std::vector<double> build_source(const SourceSpec &src, const GridSpec &grid);
std::vector<double> build_source(const ParticleState &p, double b, const GridSpec &grid);

/// RK4 integrator for phi' = eta, eta' = lap(phi) - m^2 phi + S with the
/// Laplacian applied spectrally and S held fixed over the step.
class FieldStepper {
 public:
  explicit FieldStepper(const GridSpec &grid, double blowup_threshold = 1e8);

  /// Throws ConfigError for dt outside (0, max_stable_dt] and SolverError
  /// when max|phi| exceeds the blow-up threshold.
  FieldState step(const FieldState &state, double dt, std::span<const double> source);
  SpectralField step(const SpectralField &state, double dt, std::span<const Complex> source_hat) const;

  Fft2d &fft() { return fft_; }

 private:
  GridSpec grid_;
  double blowup_;
  std::vector<double> omega2_;
  Fft2d fft_;
};

FieldState step_field(const FieldState &state, double dt, std::span<const double> source);

/// Spectral Laplacian and gradient of a nodal array.
std::vector<double> spectral_laplacian(const GridSpec &grid, std::span<const double> f);
std::array<std::vector<double>, 2> spectral_gradient(const GridSpec &grid, std::span<const double> f);

enum class Interp { Spectral, Bicubic };

struct PointSample {
  double value = 0.0;
  Vec2 gradient;
};

/// Evaluates the band-limited interpolant of a half spectrum and its
/// gradient at q. `kernel`, when non-empty, multiplies each mode (used for
/// Gaussian-weighted averages about q).
PointSample sample_spectrum(const ModeTable &modes, std::span<const Complex> coeffs, const Vec2 &q,
                            std::span<const double> kernel = {});

/// Repeated point sampling of one FieldState. Spectral mode sums every mode
/// (exact for band-limited data); bicubic mode interpolates spectrally
/// differentiated nodal fields with Catmull-Rom weights (O(h^4)).
class FieldSampler {
 public:
  explicit FieldSampler(const FieldState &state, Interp method = Interp::Spectral);
  double value(const Vec2 &q) const;
  Vec2 gradient(const Vec2 &q) const;
  double eta(const Vec2 &q) const;

 private:
  double bicubic(std::span<const double> f, const Vec2 &q) const;

  Interp method_;
  ModeTable modes_;
  std::vector<Complex> phi_hat_, eta_hat_;
  std::vector<double> phi_, eta_, dx_, dy_;
};

double sample_value(const FieldState &state, const Vec2 &q, Interp method = Interp::Spectral);
Vec2 sample_gradient(const FieldState &state, const Vec2 &q, Interp method = Interp::Spectral);

/// -m^2 sum(eta grad phi) dA. Positive along the direction of travel of a
/// wavepacket.
Vec2 field_momentum(const FieldState &state);
Vec2 field_momentum(const SpectralField &state, const ModeTable &modes);
/// m^2 sum(1/2 (eta^2 + |grad phi|^2 + m^2 phi^2)) dA.
double field_energy(const FieldState &state);
double field_energy(const SpectralField &state, const ModeTable &modes);
/// z-component of field angular momentum about `origin`, using
/// minimum-image coordinates.
double field_angular_momentum(const FieldState &state, const Vec2 &origin);

}  // namespace pwsim
