#include "pwsim/config.hpp"
#include "pwsim/diagnostics.hpp"
#include "pwsim/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

using namespace pwsim;
using namespace pwsim::diag;

namespace {

constexpr double kPi = std::numbers::pi;

// Sampled f(t) on [0, duration) with step dt; frequency arguments in units of
// omega_c with t in Compton periods, so sin(2 pi f t).
template <class F>
std::vector<double> sample(F f, double dt, double duration) {
  std::vector<double> v;
  for (int i = 0; i * dt < duration - 1e-12; ++i) v.push_back(f(i * dt));
  return v;
}

std::vector<BudgetSample> synthetic_budgets(int n) {
  std::vector<BudgetSample> b(n);
  for (int i = 0; i < n; ++i) {
    const double t = 0.1 * i;
    b[i].t = t;
    b[i].p_part = {0.4 - 0.01 * t, 0.0};
    b[i].p_field = {0.01 * t + 1e-4 * std::sin(t), 2e-4 * std::cos(t) - 2e-4};
    b[i].e_part = 1.1 - 0.02 * t;
    b[i].e_field = 0.03 * t;
    b[i].exchange = 0.01 * t;
    b[i].lz = 0.5 + 1e-3 * t;
  }
  return b;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("budget series") {
  const auto raw = synthetic_budgets(50);
  const BudgetSeries s = budgets(raw);
  REQUIRE(s.size() == 50);
  CHECK(s.index_at(0.0) == 0);
  CHECK(s.index_at(0.25) == 3);
  CHECK(s.p_total(10).x == doctest::Approx(0.4 + 1e-4 * std::sin(1.0)));
  CHECK(momentum_drift(s) == doctest::Approx(std::hypot(1e-4 * std::sin(4.8), 2e-4 * (std::cos(4.8) - 1)) / 0.4)
                                 .epsilon(0.2));
  CHECK(angular_momentum_drift(s) == doctest::Approx(1e-3 * 4.9));
  CHECK(angular_momentum_drift(s, 2.0) == doctest::Approx(1e-3 * 2.9));
  const auto r = energy_residual(s);
  // dE = 0.01 t and dX = 0.01 t cancel.
  for (double v : r) CHECK(std::abs(v) < 1e-15);
  CHECK(energy_residual(s, 1.0).size() == 40);

  CHECK_THROWS(budgets(std::span<const BudgetSample>{}));
  auto unordered = raw;
  std::swap(unordered[3], unordered[4]);
  CHECK_THROWS(budgets(unordered));
}

TEST_CASE("budgets are additive over segments") {
  const auto raw = synthetic_budgets(40);
  const BudgetSeries all = budgets(raw);
  const auto span = std::span<const BudgetSample>(raw);
  for (const std::size_t cut : {std::size_t{20}, std::size_t{21}}) {
    const BudgetSeries a = budgets(span.subspan(0, cut));
    const BudgetSeries b = budgets(span.subspan(20));  // shares sample 20 when cut = 21
    const BudgetSeries c = concat(a, b);
    REQUIRE(c.size() == all.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(c.t[i] == all.t[i]);
      CHECK(c.p_total(i) == all.p_total(i));
      CHECK(c.e_total(i) == all.e_total(i));
      CHECK(c.lz[i] == all.lz[i]);
    }
  }
  CHECK_THROWS(concat(budgets(span.subspan(10)), budgets(span.subspan(0, 5))));
}

TEST_CASE("decoupled run has constant separate budgets") {
  SimConfig c = parse_config_text("grid.n = 64\ngrid.length = 16\nphysics.b = 0\ntime.dt = 0.02\n"
                                  "time.duration = 2\nscenario.ramp = 0\nrecord.budget_stride = 5\n");
  const BudgetSeries s = budgets(run(c));
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.exchange[i] == 0.0);
    CHECK(s.p_part[i] == s.p_part[0]);
    CHECK(s.e_part[i] == s.e_part[0]);
    CHECK(s.e_field[i] == 0.0);
  }
  for (double v : energy_residual(s)) CHECK(v == 0.0);
}

TEST_CASE("energy residual is robust to the budget stride") {
  const std::string base = "grid.n = 64\ngrid.length = 16\nphysics.b = 20\ntime.dt = 0.02\ntime.duration = 3\n"
                           "scenario.ramp = 0\nrecord.traj_stride = 50\n";
  const BudgetSeries s1 = budgets(run(parse_config_text(base + "record.budget_stride = 2\n")));
  const BudgetSeries s2 = budgets(run(parse_config_text(base + "record.budget_stride = 4\n")));
  const auto r1 = energy_residual(s1), r2 = energy_residual(s2);
  double scale = 0.0;
  for (double x : s1.exchange) scale = std::max(scale, std::abs(x));
  REQUIRE(scale > 0.0);
  for (std::size_t i = 0; i < r2.size(); ++i) CHECK(std::abs(r2[i] - r1[2 * i]) < 1e-12 * scale);
}

TEST_CASE("spectrogram satisfies Parseval") {
  const double dt = 0.05;
  // Burst supported away from the ends so every sample is fully covered.
  auto burst = [](double t) {
    const double env = t > 10 && t < 30 ? std::pow(std::sin(kPi * (t - 10) / 20), 2) : 0.0;
    return env * (std::sin(2 * kPi * 0.93 * t) + 0.3 * std::cos(2 * kPi * 1.7 * t + 0.4));
  };
  const auto x = sample(burst, dt, 40.0);
  const Spectrogram s = spectrogram(x, dt, 8.0, 2.0);  // hop = window / 4
  REQUIRE(s.frame_samples == 160);
  double frames = 0.0;
  const std::size_t nf = s.n_freqs();
  REQUIRE(nf == 81);
  for (std::size_t ti = 0; ti < s.n_times(); ++ti)
    for (std::size_t fi = 0; fi < nf; ++fi) {
      const double a = s.at(ti, fi) / s.scale;
      frames += (fi == 0 || fi + 1 == nf ? 1.0 : 2.0) * a * a / s.fft_samples;
    }
  double energy = 0.0;
  for (double v : x) energy += v * v;
  // Sum over hops of the squared periodic Hann window is 3W / (8H) = 1.5.
  CHECK(frames == doctest::Approx(1.5 * energy).epsilon(1e-6));
  for (double m : s.magnitude) CHECK(m >= 0.0);
}

TEST_CASE("spectrogram layout") {
  const auto x = sample([](double t) { return std::sin(2 * kPi * t); }, 0.01, 30.0);
  const Spectrogram s = spectrogram(x, 0.01, 8.0, 1.0, 2, 5.0);
  CHECK(s.frame_samples == 800);
  CHECK(s.fft_samples == 1600);
  CHECK(s.bin_width() == doctest::Approx(1.0 / 16.0));
  CHECK(s.times.front() == doctest::Approx(9.0));
  CHECK(s.times[1] - s.times[0] == doctest::Approx(1.0));
  CHECK(s.n_times() == 23);
  CHECK(s.magnitude.size() == s.n_times() * s.n_freqs());
  CHECK_THROWS(spectrogram(std::span<const double>(x).subspan(0, 100), 0.01, 8.0, 1.0));
}

TEST_CASE("dominant frequency") {
  const double dt = 0.02;
  const auto one = sample([](double t) { return std::sin(2 * kPi * 0.9 * t); }, dt, 40.0);
  const Spectrogram s = spectrogram(one, dt);
  CHECK(std::abs(dominant_frequency(s, 0, 40) - 0.9) < s.bin_width());
  CHECK(dominant_frequency(s, 0, 40) == doctest::Approx(0.9).epsilon(5e-3));

  const auto two = sample(
      [](double t) { return 0.4 * std::sin(2 * kPi * 0.87 * t) + 1.0 * std::sin(2 * kPi * 1.36 * t); }, dt, 40.0);
  const Spectrogram s2 = spectrogram(two, dt);
  CHECK(dominant_frequency(s2, 0, 40) == doctest::Approx(1.36).epsilon(1e-2));
  CHECK(dominant_frequency(s2, 0, 40, 0.5, 1.1) == doctest::Approx(0.87).epsilon(1e-2));

  // Invariant under amplitude rescaling.
  auto scaled = two;
  for (double &v : scaled) v *= 1e-5;
  CHECK(dominant_frequency(spectrogram(scaled, dt), 0, 40) == dominant_frequency(s2, 0, 40));

  CHECK_THROWS(dominant_frequency(s, 100, 200));
  CHECK_THROWS(dominant_frequency(s, 0, 40, 30.0, 40.0));
}

TEST_CASE("high-pass filter") {
  const double dt = 0.01;
  const auto drift = sample([](double t) { return 3.0 + 0.41 * t; }, dt, 30.0);
  const auto out = highpass(drift, dt);
  double worst = 0.0;
  for (double v : out) worst = std::max(worst, std::abs(v));
  CHECK(worst < 1e-6 * 15.0);

  const double A = 0.02;
  const auto mixed = sample([A](double t) { return 5.0 + 0.35 * t + A * std::sin(2 * kPi * t); }, dt, 30.0);
  const auto z = highpass(mixed, dt);
  double peak = 0.0, sum = 0.0;
  for (std::size_t i = 500; i + 500 < z.size(); ++i) {
    peak = std::max(peak, std::abs(z[i]));
    const double ref = A * std::sin(2 * kPi * i * dt);
    CHECK(std::abs(z[i] - ref) < 0.01 * A);
  }
  for (double v : z) sum += v;
  CHECK(peak == doctest::Approx(A).epsilon(1e-2));
  CHECK(std::abs(sum / z.size()) < 1e-3 * A);

  CHECK_THROWS_AS(highpass(mixed, dt, 50.0), std::invalid_argument);
  CHECK_THROWS_AS(highpass(mixed, dt, 80.0), std::invalid_argument);
}

TEST_CASE("oscillation amplitude calibration") {
  const double dt = 0.02;
  for (const double f : {0.9, 1.0, 1.2}) {
    for (const double A : {1.0, 0.013}) {
      const auto x = sample([&](double t) { return A * std::sin(2 * kPi * f * t + 0.3); }, dt, 30.0);
      const Spectrogram s = spectrogram(x, dt);
      CAPTURE(f);
      CHECK(oscillation_amplitude(s, default_tail(s)) == doctest::Approx(A).epsilon(3e-2));
    }
  }
  const std::vector<double> zero(1500, 0.0);
  const Spectrogram s0 = spectrogram(zero, dt);
  CHECK(oscillation_amplitude(s0, default_tail(s0)) == 0.0);
  CHECK(default_tail(s0) == 10);
  CHECK_THROWS(oscillation_amplitude(s0, 0));
  CHECK_THROWS(oscillation_amplitude(s0, s0.n_times() + 1));
}

TEST_CASE("amplitude scaling fit") {
  std::vector<std::pair<double, double>> pts;
  for (const double g : {1.05, 1.1, 1.2, 1.35, 1.5}) pts.emplace_back(g, std::pow(g, -2.38) / 28.0);
  const ScalingFit f = fit_amplitude_scaling(pts);
  CHECK(f.n_b == doctest::Approx(28.0).epsilon(1e-8));
  CHECK(f.e_b == doctest::Approx(2.38).epsilon(1e-8));
  CHECK(f.residual < 1e-8);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  auto noisy = pts;
  for (auto &p : noisy) p.second *= 1.0 + noise(rng);
  const ScalingFit g = fit_amplitude_scaling(noisy);
  CHECK(std::abs(g.n_b / 28.0 - 1.0) < 0.05);
  CHECK(std::abs(g.e_b / 2.38 - 1.0) < 0.05);

  CHECK_THROWS(fit_amplitude_scaling(std::span(pts).subspan(0, 2)));
  const std::vector<std::pair<double, double>> flat{{1.2, 0.1}, {1.2, 0.2}, {1.2, 0.3}};
  CHECK_THROWS(fit_amplitude_scaling(flat));
  const std::vector<std::pair<double, double>> rest{{1.0, 0.1}, {1.2, 0.2}, {1.3, 0.3}};
  CHECK_THROWS(fit_amplitude_scaling(rest));
}

TEST_CASE("momentum retention") {
  SUBCASE("decoupled run keeps everything") {
    const SimConfig c = parse_config_text("grid.n = 64\ngrid.length = 16\nphysics.b = 0\ntime.dt = 0.02\n"
                                          "time.duration = 3\nscenario.u0x = 0.455\n");
    const RunOutput out = run(c);
    CHECK(momentum_retention(out, 1.0, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("synthetic steady state") {
    std::vector<TrajectorySample> tr;
    std::vector<BudgetSample> bs;
    for (int i = 0; i <= 100; ++i) {
      const double t = 0.1 * i;
      const double gx = i < 10 ? 0.5 : 0.3 + 0.001 * std::sin(3.0 * t);
      tr.push_back({t, {0.3 * t, 0.0}, {gx, 0.0}, {}, 0.0});
      BudgetSample b;
      b.t = t;
      b.p_part = {gx, 0.0};
      b.p_field = {0.5 - gx, 0.0};
      bs.push_back(b);
    }
    CHECK(momentum_retention(tr, bs, 1.0, 5.0, 10.0) == doctest::Approx(0.6).epsilon(1e-3));
    // Wildly varying speed is not a steady state.
    for (int i = 50; i <= 100; ++i) tr[i].g.x = i % 2 ? 5.0 : 0.0;
    CHECK_THROWS_AS(momentum_retention(tr, bs, 1.0, 5.0, 10.0), SolverError);
  }
}

TEST_CASE("virtual-mass power law") {
  std::vector<std::pair<double, double>> pts;
  for (const double b : {20.0, 30.0, 45.0, 60.0}) pts.emplace_back(b, 1.0 - std::pow(b / 163.8, 2.0));
  const PowerLawFit f = virtual_mass_fit(pts);
  CHECK(f.exponent == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(f.coefficient == doctest::Approx(163.8).epsilon(1e-10));
  CHECK(f.residual < 1e-10);
}

TEST_CASE("uncertainty product") {
  const double dt = 0.01, A = 0.03, B = 0.05, meff = 1.1;
  ZitterSeries z;
  z.sample_dt = dt;
  for (int i = 0; i < 2000; ++i) {
    const double t = i * dt;
    z.position.push_back({A * std::sin(2 * kPi * t), 0.5 * A * std::sin(2 * kPi * t)});
    z.g.push_back({B * std::cos(2 * kPi * t), 0.0});
  }
  const Vec2 p = uncertainty_product(z, meff);
  // sigma_x = A / sqrt 2 (in lambda_c = 2 pi / m), sigma_p = meff B / sqrt 2.
  CHECK(p.x == doctest::Approx(2 * kPi * A / std::sqrt(2.0) * meff * B / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(p.y == 0.0);
  ZitterSeries still = z;
  for (auto &q : still.position) q = {};
  CHECK(uncertainty_product(still, meff) == Vec2{});
  ZitterSeries shortz = z;
  shortz.position.resize(500);
  shortz.g.resize(500);
  CHECK_THROWS(uncertainty_product(shortz, meff));
}

TEST_CASE("statistics helpers") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
  CHECK(mean(a) == 2.5);
  CHECK(stddev(a) == doctest::Approx(std::sqrt(1.25)));
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  std::vector<double> x, ph;
  for (int i = 0; i < 50; ++i) {
    x.push_back(0.1 * i);
    ph.push_back(std::remainder(2.7 * 0.1 * i + 0.2, 2 * kPi));
  }
  CHECK(phase_slope(x, ph) == doctest::Approx(2.7).epsilon(1e-10));
}

TEST_CASE("run analysis") {
  const SimConfig c = parse_config_text("grid.n = 64\ngrid.length = 16\nphysics.b = 5\ntime.dt = 0.02\n"
                                        "time.duration = 30\nscenario.u0x = 0.35\nscenario.ramp = 0\n"
                                        "record.traj_stride = 1\nrecord.budget_stride = 10\n");
  const RunOutput out = run(c);
  const RunAnalysis a = analyze_run(c, out.trajectory, out.budgets);
  CHECK(std::isfinite(a.momentum_drift));
  CHECK(a.momentum_drift < 1e-2);
  CHECK(a.energy_residual < 0.05);
  CHECK(a.final_speed > 0.0);
  CHECK(a.final_speed < 0.35);
  REQUIRE(a.spectrogram.has_value());
  CHECK(std::isfinite(a.dominant_frequency));
  CHECK(std::isfinite(a.retention));
  CHECK(a.retention <= 1.0);

  // Too short for the spectral quantities: they stay NaN with a note.
  const std::span<const TrajectorySample> head(out.trajectory.data(), 200);
  const RunAnalysis s = analyze_run(c, head, std::span(out.budgets).subspan(0, 20));
  CHECK(std::isnan(s.dominant_frequency));
  CHECK(std::isnan(s.uncertainty.x));
  CHECK_FALSE(s.notes.empty());
}

}  // TEST_SUITE
