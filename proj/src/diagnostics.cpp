#include "pwsim/diagnostics.hpp"

#include "pwsim/error.hpp"
#include "pwsim/fft.hpp"
#include "pwsim/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pwsim::diag {
namespace {

constexpr double kPi = std::numbers::pi;

struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(std::vector<double> &x) const {
    double z1 = 0.0, z2 = 0.0;
    for (double &v : x) {
      const double y = b0 * v + z1;
      z1 = b1 * v - a1 * y + z2;
      z2 = b2 * v - a2 * y;
      v = y;
    }
  }
};

Biquad highpass_section(double w0, double q) {
  const double c = std::cos(w0), alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return Biquad{0.5 * (1.0 + c) / a0, -(1.0 + c) / a0, 0.5 * (1.0 + c) / a0, -2.0 * c / a0, (1.0 - alpha) / a0};
}

void filter_pass(std::vector<double> &x, const std::array<Biquad, 2> &sections) {
  // Start from rest relative to the first sample; a constant offset is
  // annihilated by the high-pass anyway.
  const double x0 = x.front();
  for (double &v : x) v -= x0;
  for (const auto &s : sections) s.run(x);
}

std::vector<double> hann(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n));
  return w;
}

double frame_l1(const std::vector<double> &frame, const std::vector<double> &w, int nfft, double scale) {
  std::vector<double> buf(nfft, 0.0);
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i] * w[i];
  const auto spec = real_dft(buf);
  double s = 0.0;
  for (const auto &c : spec) s += std::abs(c) * scale;
  return s;
}

}  // namespace

std::size_t BudgetSeries::index_at(double time) const {
  const auto it = std::lower_bound(t.begin(), t.end(), time - 1e-9);
  if (it == t.end()) throw std::out_of_range("no budget sample at or after t = " + std::to_string(time));
  return static_cast<std::size_t>(it - t.begin());
}

BudgetSeries budgets(std::span<const BudgetSample> samples) {
  if (samples.empty()) throw std::runtime_error("run has no budget samples");
  BudgetSeries s;
  for (const auto &b : samples) {
    if (!s.t.empty() && !(b.t > s.t.back())) throw std::runtime_error("budget samples are not time-ordered");
    s.t.push_back(b.t);
    s.p_part.push_back(b.p_part);
    s.p_field.push_back(b.p_field);
    s.e_part.push_back(b.e_part);
    s.e_field.push_back(b.e_field);
    s.exchange.push_back(b.exchange);
    s.lz.push_back(b.lz);
  }
  return s;
}

BudgetSeries budgets(const RunOutput &run) { return budgets(std::span<const BudgetSample>(run.budgets)); }

BudgetSeries concat(const BudgetSeries &a, const BudgetSeries &b) {
  BudgetSeries out = a;
  std::size_t start = 0;
  if (!a.t.empty() && !b.t.empty()) {
    if (std::abs(b.t.front() - a.t.back()) < 1e-9) start = 1;
    else if (b.t.front() < a.t.back()) throw std::invalid_argument("segments overlap");
  }
  for (std::size_t i = start; i < b.size(); ++i) {
    out.t.push_back(b.t[i]);
    out.p_part.push_back(b.p_part[i]);
    out.p_field.push_back(b.p_field[i]);
    out.e_part.push_back(b.e_part[i]);
    out.e_field.push_back(b.e_field[i]);
    out.exchange.push_back(b.exchange[i]);
    out.lz.push_back(b.lz[i]);
  }
  return out;
}

std::vector<double> energy_residual(const BudgetSeries &s, double t0) {
  const std::size_t i0 = s.index_at(t0);
  std::vector<double> r;
  r.reserve(s.size() - i0);
  for (std::size_t i = i0; i < s.size(); ++i)
    r.push_back(s.e_total(i) - s.e_total(i0) - (s.exchange[i] - s.exchange[i0]));
  return r;
}

double momentum_drift(const BudgetSeries &s, double t0) {
  const std::size_t i0 = s.index_at(t0);
  const Vec2 p0 = s.p_total(i0);
  double worst = 0.0;
  for (std::size_t i = i0; i < s.size(); ++i) worst = std::max(worst, (s.p_total(i) - p0).norm());
  return worst / p0.norm();
}

double angular_momentum_drift(const BudgetSeries &s, double t0) {
  const std::size_t i0 = s.index_at(t0);
  double worst = 0.0;
  for (std::size_t i = i0; i < s.size(); ++i) worst = std::max(worst, std::abs(s.lz[i] - s.lz[i0]));
  return worst;
}

Spectrogram spectrogram(std::span<const double> signal, double sample_dt, double window, double hop, int zero_pad,
                        double t0) {
  if (!(sample_dt > 0.0)) throw std::invalid_argument("sample_dt must be positive");
  if (zero_pad < 1) throw std::invalid_argument("zero_pad must be >= 1");
  const int W = static_cast<int>(std::lround(window / sample_dt));
  const int H = std::max(1, static_cast<int>(std::lround(hop / sample_dt)));
  if (W < 4) throw std::invalid_argument("window shorter than four samples");
  if (static_cast<std::size_t>(W) > signal.size()) throw std::invalid_argument("window longer than the signal");

  Spectrogram s;
  s.window = W * sample_dt;
  s.hop = H * sample_dt;
  s.sample_dt = sample_dt;
  s.frame_samples = W;
  s.fft_samples = W * zero_pad;
  const auto w = hann(W);
  s.scale = 2.0 / std::accumulate(w.begin(), w.end(), 0.0);
  const int nf = s.fft_samples / 2 + 1;
  for (int k = 0; k < nf; ++k) s.frequencies.push_back(k / (s.fft_samples * sample_dt));

  std::vector<double> buf(s.fft_samples);
  for (std::size_t start = 0; start + W <= signal.size(); start += H) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int i = 0; i < W; ++i) buf[i] = signal[start + i] * w[i];
    const auto spec = real_dft(buf);
    for (const auto &c : spec) s.magnitude.push_back(std::abs(c) * s.scale);
    s.times.push_back(t0 + (static_cast<double>(start) + 0.5 * W) * sample_dt);
  }
  return s;
}

double dominant_frequency(const Spectrogram &s, double t_from, double t_to, double f_min, double f_max) {
  std::vector<double> avg(s.n_freqs(), 0.0);
  int frames = 0;
  for (std::size_t ti = 0; ti < s.n_times(); ++ti) {
    if (s.times[ti] < t_from || s.times[ti] > t_to) continue;
    for (std::size_t fi = 0; fi < s.n_freqs(); ++fi) avg[fi] += s.at(ti, fi);
    ++frames;
  }
  if (frames == 0) throw std::invalid_argument("no spectrogram frames in the requested time range");
  std::size_t best = s.n_freqs();
  for (std::size_t fi = 0; fi < s.n_freqs(); ++fi) {
    if (s.frequencies[fi] < f_min || s.frequencies[fi] > f_max) continue;
    if (best == s.n_freqs() || avg[fi] > avg[best]) best = fi;
  }
  if (best == s.n_freqs()) throw std::invalid_argument("no frequency bins in the requested range");
  double f = s.frequencies[best];
  if (best > 0 && best + 1 < s.n_freqs()) {
    const double a = avg[best - 1], b = avg[best], c = avg[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) f += 0.5 * (a - c) / denom * s.bin_width();
  }
  return f;
}

std::vector<double> highpass(std::span<const double> signal, double sample_dt, double cutoff) {
  const std::size_t n = signal.size();
  if (n < 3) throw std::invalid_argument("highpass needs at least three samples");
  const double fs = 1.0 / sample_dt;
  if (!(cutoff > 0.0) || cutoff >= 0.5 * fs)
    throw std::invalid_argument("cutoff " + std::to_string(cutoff) + " is not below the Nyquist frequency " +
                                std::to_string(0.5 * fs));

  // Linear detrend.
  const double tm = 0.5 * (n - 1);
  double sxx = 0.0, sxy = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = i - tm;
    sxx += d * d;
    sxy += d * signal[i];
    sy += signal[i];
  }
  const double slope = sxy / sxx, mean = sy / n;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = signal[i] - mean - slope * (i - tm);

  const double w0 = 2.0 * kPi * cutoff / fs;
  const std::array<Biquad, 2> sections{highpass_section(w0, 1.0 / (2.0 * std::cos(kPi / 8.0))),
                                       highpass_section(w0, 1.0 / (2.0 * std::cos(3.0 * kPi / 8.0)))};

  const std::size_t pad = std::min<std::size_t>(n - 1, std::max<std::size_t>(15, std::llround(3.0 * fs / cutoff)));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  filter_pass(ext, sections);
  std::reverse(ext.begin(), ext.end());
  filter_pass(ext, sections);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

double oscillation_amplitude(const Spectrogram &s, std::size_t tail) {
  if (tail == 0 || tail > s.n_times())
    throw std::invalid_argument("tail of " + std::to_string(tail) + " frames outside [1, " +
                                std::to_string(s.n_times()) + "]");
  double acc = 0.0;
  for (std::size_t ti = s.n_times() - tail; ti < s.n_times(); ++ti)
    for (std::size_t fi = 0; fi < s.n_freqs(); ++fi) acc += s.at(ti, fi);
  acc /= static_cast<double>(tail);

  // Calibrate against unit sinusoids near omega_c, averaged across one bin
  // and several phases to remove scalloping.
  const auto w = hann(s.frame_samples);
  const double fs = 1.0 / s.sample_dt;
  const double f_ref = std::min(1.0, 0.25 * fs);
  const double df = 1.0 / (s.frame_samples * s.sample_dt);
  double unit = 0.0;
  int count = 0;
  std::vector<double> frame(s.frame_samples);
  for (int j = 0; j < 8; ++j) {
    for (int p = 0; p < 4; ++p) {
      const double f = f_ref + df * j / 8.0;
      const double ph = 0.5 * kPi * p;
      for (int i = 0; i < s.frame_samples; ++i) frame[i] = std::sin(2.0 * kPi * f * i * s.sample_dt + ph);
      unit += frame_l1(frame, w, s.fft_samples, s.scale);
      ++count;
    }
  }
  unit /= count;
  return acc / unit;
}

std::size_t default_tail(const Spectrogram &s, double periods) {
  if (s.n_times() == 0) return 0;
  const double t_end = s.times.back();
  std::size_t k = 0;
  for (double t : s.times)
    if (t > t_end - periods) ++k;
  return std::max<std::size_t>(1, k);
}

ScalingFit fit_amplitude_scaling(std::span<const std::pair<double, double>> pts) {
  if (pts.size() < 3) throw std::invalid_argument("amplitude fit needs at least three points");
  double sx = 0.0, sy = 0.0;
  for (const auto &[g, a] : pts) {
    if (!(g > 1.0)) throw std::invalid_argument("amplitude fit needs gamma > 1");
    if (!(a > 0.0)) throw std::invalid_argument("amplitude fit needs positive amplitudes");
    sx += std::log(g);
    sy += std::log(a);
  }
  const double n = static_cast<double>(pts.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto &[g, a] : pts) {
    sxx += (std::log(g) - mx) * (std::log(g) - mx);
    sxy += (std::log(g) - mx) * (std::log(a) - my);
  }
  if (sxx < 1e-14 * std::max(1.0, mx * mx)) throw std::invalid_argument("degenerate design: all gamma equal");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  ScalingFit f;
  f.e_b = -slope;
  f.n_b = std::exp(-icpt);
  double ss = 0.0;
  for (const auto &[g, a] : pts) {
    const double r = std::log(a) - (icpt + slope * std::log(g));
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

double momentum_retention(const RunOutput &run, double t_from, double t_to, double max_speed_std) {
  return momentum_retention(run.trajectory, run.budgets, run.ramp_end, t_from, t_to, max_speed_std);
}

double momentum_retention(std::span<const TrajectorySample> trajectory, std::span<const BudgetSample> samples,
                          double ramp_end, double t_from, double t_to, double max_speed_std) {
  const BudgetSeries s = budgets(samples);
  const Vec2 p0 = s.p_total(s.index_at(ramp_end));
  if (p0.norm() == 0.0) return 1.0;
  Vec2 pm;
  int count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.t[i] < t_from || s.t[i] > t_to) continue;
    pm += s.p_part[i];
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no budget samples in the steady-state window");
  pm = pm / count;
  std::vector<double> speeds;
  for (const auto &tr : trajectory)
    if (tr.t >= t_from && tr.t <= t_to) speeds.push_back(velocity_of(tr.g).norm());
  if (speeds.size() > 1 && stddev(speeds) > max_speed_std)
    throw SolverError("steady state not reached: speed std " + std::to_string(stddev(speeds)));
  return pm.norm() / p0.norm();
}

PowerLawFit virtual_mass_fit(std::span<const std::pair<double, double>> pts) {
  if (pts.size() < 2) throw std::invalid_argument("virtual mass fit needs at least two points");
  double sx = 0.0, sy = 0.0;
  for (const auto &[b, r] : pts) {
    if (!(b > 0.0) || !(r < 1.0)) throw std::invalid_argument("virtual mass fit needs b > 0 and retention < 1");
    sx += std::log(b);
    sy += std::log(1.0 - r);
  }
  const double n = static_cast<double>(pts.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto &[b, r] : pts) {
    sxx += (std::log(b) - mx) * (std::log(b) - mx);
    sxy += (std::log(b) - mx) * (std::log(1.0 - r) - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("degenerate design: all b equal");
  PowerLawFit f;
  f.exponent = sxy / sxx;
  const double icpt = my - f.exponent * mx;
  f.coefficient = std::exp(-icpt / f.exponent);
  double ss = 0.0;
  for (const auto &[b, r] : pts) {
    const double e = std::log(1.0 - r) - (icpt + f.exponent * std::log(b));
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

Vec2 uncertainty_product(const ZitterSeries &z, double m_eff, double m) {
  if (z.position.size() != z.g.size()) throw std::invalid_argument("position and momentum series differ in length");
  const double span = z.sample_dt * static_cast<double>(z.position.size());
  if (span < 10.0) throw std::invalid_argument("zitter window shorter than 10 Compton periods");
  std::vector<double> x, y, gx, gy;
  for (std::size_t i = 0; i < z.position.size(); ++i) {
    x.push_back(z.position[i].x);
    y.push_back(z.position[i].y);
    gx.push_back(z.g[i].x);
    gy.push_back(z.g[i].y);
  }
  const double lc = kTwoPi / m;
  return {stddev(x) * lc * m_eff * stddev(gx), stddev(y) * lc * m_eff * stddev(gy)};
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson needs equal-length series");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double phase_slope(std::span<const double> xs, std::span<const double> phases) {
  if (xs.size() != phases.size() || xs.size() < 2) throw std::invalid_argument("phase_slope needs matching series");
  std::vector<double> un(phases.begin(), phases.end());
  for (std::size_t i = 1; i < un.size(); ++i) {
    double d = un[i] - un[i - 1];
    d -= kTwoPi * std::round(d / kTwoPi);
    un[i] = un[i - 1] + d;
  }
  const double mx = mean(xs), my = mean(un);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < un.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (un[i] - my);
  }
  return sxy / sxx;
}

RunAnalysis analyze_run(const SimConfig &config, std::span<const TrajectorySample> trajectory,
                        std::span<const BudgetSample> budget_rows, double settle) {
  RunAnalysis a;
  const double t_ramp = ramp_end(config);
  const double sample_dt = config.dt * config.record.traj_stride;

  if (!budget_rows.empty()) {
    const BudgetSeries b = budgets(budget_rows);
    try {
      const std::size_t i0 = b.index_at(t_ramp);
      if (b.p_total(i0).norm() > 0.0) a.momentum_drift = momentum_drift(b, t_ramp);
      const auto r = energy_residual(b, t_ramp);
      double rmax = 0.0, xmax = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        rmax = std::max(rmax, std::abs(r[i]));
        xmax = std::max(xmax, std::abs(b.exchange[i0 + i] - b.exchange[i0]));
      }
      a.exchange_total = b.exchange.back() - b.exchange[i0];
      a.energy_residual = xmax > 0.0 ? rmax / xmax : rmax;
      a.lz_drift = angular_momentum_drift(b, t_ramp);
    } catch (const std::out_of_range &e) {
      a.notes.push_back(std::string("budgets: ") + e.what());
    }
  } else {
    a.notes.push_back("no budget samples");
  }

  if (trajectory.empty()) {
    a.notes.push_back("no trajectory samples");
    return a;
  }
  a.final_speed = velocity_of(trajectory.back().g).norm();

  Vec2 dir = config.scenario.u0;
  if (config.scenario.kind == ScenarioKind::BoostedKick) dir = config.scenario.u1;
  dir = dir.norm() > 0.0 ? dir / dir.norm() : Vec2{1.0, 0.0};

  std::vector<double> s_long, xs, ys, gxs, gys;
  double t_first = 0.0;
  for (const auto &r : trajectory) {
    if (r.t < t_ramp - 1e-9) continue;
    if (s_long.empty()) t_first = r.t;
    s_long.push_back(r.position.dot(dir));
    xs.push_back(r.position.x);
    ys.push_back(r.position.y);
    gxs.push_back(r.g.x);
    gys.push_back(r.g.y);
  }

  try {
    const auto hp = highpass(s_long, sample_dt, 0.5);
    Spectrogram sp = spectrogram(hp, sample_dt, 8.0, 1.0, 1, t_first);
    a.dominant_frequency = dominant_frequency(sp, sp.times.front(), sp.times.back(), 0.3);
    a.amplitude = oscillation_amplitude(sp, default_tail(sp));
    a.spectrogram = std::move(sp);
  } catch (const std::invalid_argument &e) {
    a.notes.push_back(std::string("spectrogram: ") + e.what());
  }

  const double t_end = trajectory.back().t;
  try {
    a.retention = momentum_retention(trajectory, budget_rows, t_ramp, t_ramp + settle, t_end);
  } catch (const std::exception &e) {
    a.notes.push_back(std::string("retention: ") + e.what());
  }

  try {
    ZitterSeries z;
    z.sample_dt = sample_dt;
    const auto hx = highpass(xs, sample_dt, 0.5), hy = highpass(ys, sample_dt, 0.5);
    const auto hgx = highpass(gxs, sample_dt, 0.5), hgy = highpass(gys, sample_dt, 0.5);
    for (std::size_t i = 0; i < hx.size(); ++i) {
      z.position.push_back({hx[i], hy[i]});
      z.g.push_back({hgx[i], hgy[i]});
    }
    a.uncertainty = uncertainty_product(z, theory::effective_mass(config.params.b, config.params.m), config.params.m);
  } catch (const std::invalid_argument &e) {
    a.notes.push_back(std::string("uncertainty: ") + e.what());
  }
  return a;
}

}  // namespace pwsim::diag
