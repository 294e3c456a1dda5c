#pragma once

#include "pwsim/simulation.hpp"

#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pwsim::diag {

/// Noether budgets of one run, aligned to the budget stride. Times in
/// Compton periods.
struct BudgetSeries {
  std::vector<double> t;
  std::vector<Vec2> p_part, p_field;
  std::vector<double> e_part, e_field, exchange, lz;

  std::size_t size() const { return t.size(); }
  /// First sample at or after `time`.
  std::size_t index_at(double time) const;
  Vec2 p_total(std::size_t i) const { return p_part[i] + p_field[i]; }
  double e_total(std::size_t i) const { return e_part[i] + e_field[i]; }
};

/// Throws std::runtime_error when the run carries no budget samples.
BudgetSeries budgets(const RunOutput &run);
BudgetSeries budgets(std::span<const BudgetSample> samples);
/// Concatenation of two consecutive segments (the second must start after
/// the first ends; a shared boundary sample is kept once).
BudgetSeries concat(const BudgetSeries &a, const BudgetSeries &b);

/// r(t) = [E_part + E_field](t) - [..](t0) - (X(t) - X(t0)) for t >= t0,
/// where X is the running exchange integral of m b / gamma d(phi_p).
std::vector<double> energy_residual(const BudgetSeries &s, double t0 = 0.0);
/// max |P_total(t) - P_total(t0)| / |P_total(t0)| over t >= t0.
double momentum_drift(const BudgetSeries &s, double t0 = 0.0);
/// max |L_z(t) - L_z(t0)| over t >= t0.
double angular_momentum_drift(const BudgetSeries &s, double t0 = 0.0);

struct Spectrogram {
  double window = 0.0;  // Compton periods
  double hop = 0.0;
  double sample_dt = 0.0;
  int frame_samples = 0;
  int fft_samples = 0;               // frame_samples times the zero-pad factor
  std::vector<double> frequencies;   // units of omega_c
  std::vector<double> times;         // frame centers
  std::vector<double> magnitude;     // row-major [time][frequency]
  double scale = 0.0;                // magnitude = scale * |DFT|; a bin-centered unit sinusoid peaks at 1

  std::size_t n_times() const { return times.size(); }
  std::size_t n_freqs() const { return frequencies.size(); }
  double at(std::size_t ti, std::size_t fi) const { return magnitude[ti * frequencies.size() + fi]; }
  double bin_width() const { return frequencies.size() > 1 ? frequencies[1] - frequencies[0] : 0.0; }
};

/// Hann-windowed short-time Fourier transform of a uniformly sampled
/// signal. `t0` is the time of the first sample.
Spectrogram spectrogram(std::span<const double> signal, double sample_dt, double window = 8.0, double hop = 1.0,
                        int zero_pad = 1, double t0 = 0.0);

/// Argmax of the time-averaged magnitude over frames centered in
/// [t_from, t_to] and frequencies in [f_min, f_max], refined by a parabola
/// through the neighbouring bins.
double dominant_frequency(const Spectrogram &s, double t_from, double t_to, double f_min = 0.0,
                          double f_max = 1e300);

/// Zero-phase high-pass: linear detrend followed by a forward-backward
/// fourth-order Butterworth filter. `cutoff` in units of omega_c.
std::vector<double> highpass(std::span<const double> signal, double sample_dt, double cutoff = 0.5);

/// Mean frequency-space L1 norm over the last `tail` frames, divided by the
/// L1 norm a unit sinusoid produces with the same transform settings.
double oscillation_amplitude(const Spectrogram &s, std::size_t tail);
/// Default tail: frames in the last 10 Compton periods.
std::size_t default_tail(const Spectrogram &s, double periods = 10.0);

struct ScalingFit {
  double n_b = 0.0;
  double e_b = 0.0;
  double residual = 0.0;  // rms of log residuals
};
/// Least squares on log A = -log n_b - e_b log gamma (A in Compton
/// wavelengths).
ScalingFit fit_amplitude_scaling(std::span<const std::pair<double, double>> gamma_amplitude);

/// |mean P_part over [t_from, t_to]| / |P_total at ramp_end|. Throws when
/// the particle speed standard deviation over the window exceeds
/// `max_speed_std`.
double momentum_retention(const RunOutput &run, double t_from, double t_to, double max_speed_std = 0.1);
double momentum_retention(std::span<const TrajectorySample> trajectory, std::span<const BudgetSample> budgets,
                          double ramp_end, double t_from, double t_to, double max_speed_std = 0.1);

struct PowerLawFit {
  double coefficient = 0.0;  // B in (b / B)^p
  double exponent = 0.0;
  double residual = 0.0;
};
/// Regresses log(1 - retention) on log b.
PowerLawFit virtual_mass_fit(std::span<const std::pair<double, double>> b_retention);

struct ZitterSeries {
  double sample_dt = 0.0;             // Compton periods
  std::vector<Vec2> position;         // Compton wavelengths, mean about zero
  std::vector<Vec2> g;                // reduced momentum fluctuation
};
/// Per-axis sigma_x sigma_p in units of hbar with sigma_p = m_eff std(g).
/// Requires at least 10 Compton periods of data.
Vec2 uncertainty_product(const ZitterSeries &z, double m_eff, double m = 1.0);

double mean(std::span<const double> v);
double stddev(std::span<const double> v);
double pearson(std::span<const double> a, std::span<const double> b);
/// Least-squares slope of unwrapped phase against position.
double phase_slope(std::span<const double> positions, std::span<const double> phases);

/// Summary of one recorded run. Quantities that cannot be computed from the
/// available data stay NaN and a note says why.
struct RunAnalysis {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  double dominant_frequency = kNaN;  // of the high-passed longitudinal position
  double amplitude = kNaN;           // Compton wavelengths
  double retention = kNaN;
  double final_speed = kNaN;
  double momentum_drift = kNaN;
  double energy_residual = kNaN;  // max |r| / max |X|
  double exchange_total = kNaN;
  double lz_drift = kNaN;
  Vec2 uncertainty{kNaN, kNaN};
  std::optional<Spectrogram> spectrogram;
  std::vector<std::string> notes;
};

/// Post-ramp analysis: spectrogram of the high-passed position along the kick
/// direction, budget drifts, retention over [ramp_end + settle, end] and the
/// per-axis uncertainty products of the high-passed motion.
RunAnalysis analyze_run(const SimConfig &config, std::span<const TrajectorySample> trajectory,
                        std::span<const BudgetSample> budgets, double settle = 15.0);

}  // namespace pwsim::diag
