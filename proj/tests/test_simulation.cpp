#include "pwsim/config.hpp"
#include "pwsim/error.hpp"
#include "pwsim/io.hpp"
#include "pwsim/simulation.hpp"
#include "pwsim/snapshot.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace pwsim;

namespace {

// 128 x 128 nodes over 32 Compton wavelengths; dt well inside the stability bound.
SimConfig small(const std::string &extra = {}) {
  return parse_config_text("grid.n = 128\ngrid.length = 32\ntime.dt = 0.02\ntime.duration = 4\n"
                           "record.traj_stride = 1\nrecord.budget_stride = 5\n" +
                           extra);
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

struct EnvGuard {
  explicit EnvGuard(const char *value) {
    if (const char *old = std::getenv("PWSIM_THREADS")) saved = old;
    if (value) setenv("PWSIM_THREADS", value, 1);
    else unsetenv("PWSIM_THREADS");
  }
  ~EnvGuard() {
    if (saved.empty()) unsetenv("PWSIM_THREADS");
    else setenv("PWSIM_THREADS", saved.c_str(), 1);
  }
  std::string saved;
};

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("uncoupled particle moves ballistically") {
  for (const std::string kind : {"rest-kick", "free-ballistic"}) {
    CAPTURE(kind);
    const SimConfig c = small("physics.b = 0\nscenario.kind = " + kind +
                              "\nscenario.u0x = 0.35\nscenario.u0y = -0.2\nscenario.ramp = 0\n");
    const RunOutput out = run(c);
    const double x0 = 16.0;
    for (const auto &s : out.trajectory) {
      CHECK(s.position.x == doctest::Approx(x0 + 0.35 * s.t).epsilon(1e-12));
      CHECK(s.position.y == doctest::Approx(x0 - 0.2 * s.t).epsilon(1e-12));
    }
    CHECK(out.trajectory.back().t == doctest::Approx(4.0));
    for (const auto &b : out.budgets) CHECK(b.e_field == 0.0);
  }
}

TEST_CASE("unwrapped position crosses the periodic boundary") {
  const SimConfig c = small("physics.b = 0\nscenario.kind = free-ballistic\nscenario.u0x = 0.9\n"
                            "time.duration = 25\nrecord.traj_stride = 50\n");
  const RunOutput out = run(c);
  CHECK(out.trajectory.back().position.x == doctest::Approx(16.0 + 0.9 * 25.0).epsilon(1e-12));
  CHECK(out.final_particle.position.x < c.grid.side());
}

TEST_CASE("stationary source stays put") {
  SimConfig c = small("scenario.kind = stationary\ntime.duration = 30\nrecord.traj_stride = 10\n"
                      "record.budget_stride = 100\n");
  const RunOutput out = run(c);
  double dev = 0.0;
  for (const auto &s : out.trajectory) dev = std::max(dev, (s.position - Vec2{16.0, 16.0}).norm());
  CHECK(dev < 1e-6);
  for (const auto &b : out.budgets) {
    CHECK(std::abs(b.p_field.x) < 1e-9);
    CHECK(std::abs(b.p_field.y) < 1e-9);
    CHECK(std::abs(b.lz) < 1e-9);
  }
  // The field approaches the static solution.
  const FieldState ref = static_field(c, c.grid.center());
  const double err = test::max_abs_diff(out.final_field.phi, ref.phi) / test::max_abs(ref.phi);
  const FieldState zero = FieldState::zeros(c.grid);
  CHECK(err < 0.5);
  CHECK(err < test::max_abs_diff(zero.phi, ref.phi) / test::max_abs(ref.phi));
}

TEST_CASE("pre-relaxed stationary run stays static") {
  const SimConfig c = small("scenario.kind = stationary\ninit.field = static\ntime.duration = 5\n");
  const FieldState relaxed = relax_static(c);
  const RunOutput out = run(c);
  const double drift = test::max_abs_diff(out.final_field.phi, relaxed.phi) / test::max_abs(relaxed.phi);
  CHECK(drift / 5.0 < 1e-4);
}

TEST_CASE("kicked particle conserves total momentum and balances energy") {
  struct Drift {
    double dp, de, dx, g_first, g_last;
  };
  auto measure = [](const std::string &dt) {
    const SimConfig c = small("physics.b = 5\nscenario.u0x = 0.35\nscenario.ramp = 0\ntime.duration = 6\n"
                              "record.budget_stride = 1\ntime.dt = " + dt + "\n");
    const RunOutput out = run(c);
    const auto &b0 = out.budgets.front();
    const double p0 = (b0.p_part + b0.p_field).norm();
    Drift d{0.0, 0.0, 0.0, out.trajectory.front().g.x, out.trajectory.back().g.x};
    for (const auto &b : out.budgets) {
      d.dp = std::max(d.dp, (b.p_part + b.p_field - b0.p_part - b0.p_field).norm() / p0);
      d.de = std::max(d.de, std::abs((b.e_part + b.e_field - b0.e_part - b0.e_field) - (b.exchange - b0.exchange)));
      d.dx = std::max(d.dx, std::abs(b.exchange - b0.exchange));
    }
    return d;
  };
  const Drift coarse = measure("0.02"), fine = measure("0.01");
  CHECK(coarse.dp < 1e-4);
  CHECK(fine.dp < coarse.dp);
  CHECK(coarse.dx > 0.0);
  CHECK(coarse.de < 1e-3 * coarse.dx);
  CHECK(fine.de < coarse.de);
  // Field drag slows the particle.
  CHECK(coarse.g_last < coarse.g_first);
}

TEST_CASE("observer sees every step") {
  const SimConfig c = small("time.duration = 0.4\n");
  std::int64_t calls = 0, last = -1;
  RunOptions opt;
  opt.observer = [&](const StepView &v) {
    CHECK(v.step == last + 1);
    last = v.step;
    ++calls;
  };
  run(c, opt);
  CHECK(calls == c.total_steps() + 1);
}

TEST_CASE("identical configs give bit-identical files") {
  const auto dir = test::scratch_dir("determinism");
  SimConfig c = small("physics.b = 53.3\nscenario.u0x = 0.3\nscenario.u0y = 0.1\ntime.duration = 3\n");
  for (const char *name : {"a", "b"}) {
    c.output_dir = (dir / name).string();
    io::write_run(run(c), c);
  }
  CHECK(slurp(dir / "a" / "trajectory.txt") == slurp(dir / "b" / "trajectory.txt"));
  CHECK(slurp(dir / "a" / "budgets.txt") == slurp(dir / "b" / "budgets.txt"));
  CHECK(!slurp(dir / "a" / "trajectory.txt").empty());
}

TEST_CASE("resuming from a snapshot reproduces the uninterrupted run") {
  const auto dir = test::scratch_dir("restart");
  SimConfig c = small("physics.b = 53.3\nscenario.u0x = 0.35\nscenario.ramp = 0.5\ntime.duration = 3\n"
                      "record.snapshot_every = 1000\n");
  c.output_dir = (dir / "full").string();
  const RunOutput full = run(c);

  c.output_dir = (dir / "first").string();
  RunOptions stop;
  stop.stop_after = 60;  // stops inside the ramp
  const RunOutput first = run(c, stop);
  REQUIRE(first.snapshots.size() == 1);

  SimConfig resumed = c;
  resumed.init = InitialField::Snapshot;
  resumed.init_snapshot = first.snapshots.front();
  resumed.output_dir = (dir / "second").string();
  const RunOutput second = run(resumed);

  REQUIRE(second.trajectory.size() + 60 == full.trajectory.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < second.trajectory.size(); ++i) {
    const auto &a = full.trajectory[i + 60], &b = second.trajectory[i];
    REQUIRE(a.t == doctest::Approx(b.t));
    worst = std::max(worst, (a.position - b.position).norm() / a.position.norm());
    worst = std::max(worst, (a.g - b.g).norm() / std::max(1e-3, a.g.norm()));
  }
  CHECK(worst < 1e-10);
  const auto &ea = full.budgets.back(), &eb = second.budgets.back();
  CHECK(eb.exchange == doctest::Approx(ea.exchange).epsilon(1e-10));
}

TEST_CASE("snapshot on a different grid is rejected") {
  const auto dir = test::scratch_dir("mismatch");
  const SimConfig c = small();
  write_snapshot((dir / "s.pwf").string(), FieldState::zeros(GridSpec(64, 32.0)));
  SimConfig r = c;
  r.init = InitialField::Snapshot;
  r.init_snapshot = (dir / "s.pwf").string();
  CHECK_THROWS_AS(run(r), ConfigError);
  r.init_snapshot = (dir / "missing.pwf").string();
  CHECK_THROWS_AS(run(r), IoError);
}

TEST_CASE("blow-up is reported with its step") {
  const SimConfig c = small("physics.b = 1e12\nscenario.kind = stationary\n");
  try {
    run(c);
    FAIL("expected SolverError");
  } catch (const SolverError &e) {
    CHECK(e.step() > 0);
    CHECK(e.step() <= c.total_steps());
  }
}

TEST_CASE("stability bound is enforced with the key") {
  try {
    small("time.dt = 0.2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    CHECK(e.key() == "time.dt");
  }
}

TEST_CASE("relaxed static field") {
  const SimConfig c = small();
  const FieldState f = relax_static(c);
  const int n = c.grid.n();
  // Mirror and diagonal symmetry about the center node.
  double asym = 0.0;
  for (int iy = 1; iy < n; ++iy)
    for (int ix = 1; ix < n; ++ix) {
      const double v = f.phi[iy * n + ix];
      asym = std::max(asym, std::abs(v - f.phi[iy * n + (n - ix)]));
      asym = std::max(asym, std::abs(v - f.phi[(n - iy) * n + ix]));
      asym = std::max(asym, std::abs(v - f.phi[ix * n + iy]));
    }
  CHECK(asym < 1e-10 * test::max_abs(f.phi));
  const FieldState direct = static_field(c, c.grid.center());
  CHECK(test::max_abs_diff(f.phi, direct.phi) < 1e-3 * test::max_abs(direct.phi));
  // Linear in the coupling.
  SimConfig c2 = c;
  c2.params.b *= 2.0;
  const FieldState f2 = relax_static(c2);
  double lin = 0.0;
  for (std::size_t i = 0; i < f.phi.size(); ++i) lin = std::max(lin, std::abs(f2.phi[i] - 2.0 * f.phi[i]));
  CHECK(lin < 1e-12 * test::max_abs(f2.phi));
}

TEST_CASE("relaxation that cannot converge is a solver fault") {
  SimConfig c = small("relax.max_periods = 1\nrelax.tolerance = 1e-12\n");
  CHECK_THROWS_AS(relax_static(c), SolverError);
}

TEST_CASE("sweeps") {
  const EnvGuard env("2");
  SimConfig base = small("time.duration = 0.5\n");
  base.output_dir = test::scratch_dir("sweep").string();
  SUBCASE("empty axis") { CHECK(sweep(base, "physics.b", {}).empty()); }
  SUBCASE("per-run failures are isolated") {
    const auto r = sweep(base, "physics.b", {"0", "oops", "10", "-1"});
    REQUIRE(r.size() == 4);
    CHECK(r[0].output.has_value());
    CHECK(r[0].error.empty());
    CHECK_FALSE(r[1].output.has_value());
    CHECK(r[1].error.find("physics.b") != std::string::npos);
    CHECK(r[2].output.has_value());
    CHECK_FALSE(r[3].output.has_value());
    CHECK(r[2].value == "10");
  }
  SUBCASE("matches individual runs") {
    const auto r = sweep(base, "scenario.u0x", {"0.1", "0.3"});
    SimConfig one = base;
    set_config_value(one, "scenario.u0x", "0.3");
    const RunOutput ref = run(one);
    REQUIRE(r[1].output);
    CHECK(r[1].output->trajectory.back().position == ref.trajectory.back().position);
  }
}

TEST_CASE("worker cap from the environment") {
  {
    const EnvGuard env("3");
    CHECK(worker_count() == 3);
  }
  {
    const EnvGuard env("zero");
    CHECK_THROWS_AS(worker_count(), ConfigError);
  }
  {
    const EnvGuard env("0");
    CHECK_THROWS_AS(worker_count(), ConfigError);
  }
  {
    const EnvGuard env(nullptr);
    CHECK(worker_count() >= 1);
  }
}

}  // TEST_SUITE
