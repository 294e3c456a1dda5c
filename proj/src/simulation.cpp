#include "pwsim/simulation.hpp"

#include "pwsim/config.hpp"
#include "pwsim/error.hpp"
#include "pwsim/snapshot.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

namespace pwsim {

namespace {
constexpr double kBlowup = 1e8;  // |phi| at the particle
}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::RestKick: return "rest-kick";
    case ScenarioKind::BoostedKick: return "boosted-kick";
    case ScenarioKind::Stationary: return "stationary";
    case ScenarioKind::FreeBallistic: return "free-ballistic";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from(const std::string &name) {
  if (name == "rest-kick") return ScenarioKind::RestKick;
  if (name == "boosted-kick") return ScenarioKind::BoostedKick;
  if (name == "stationary") return ScenarioKind::Stationary;
  if (name == "free-ballistic") return ScenarioKind::FreeBallistic;
  throw ConfigError("unknown scenario kind '" + name + "'", "scenario.kind");
}

void SimConfig::validate() const {
  params.validate();
  if (grid.mass() != params.m) throw ConfigError("grid mass does not match physics.m", "physics.m");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time.dt must be positive", "time.dt");
  const double bound = grid.max_stable_dt() / compton_period(params.m);
  if (dt > bound)
    throw ConfigError("time.dt = " + std::to_string(dt) + " exceeds the stability bound " + std::to_string(bound) +
                          " Compton periods for this grid",
                      "time.dt");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("time.duration must be positive", "time.duration");
  if (record.traj_stride < 1) throw ConfigError("record.traj_stride must be >= 1", "record.traj_stride");
  if (record.budget_stride < 1) throw ConfigError("record.budget_stride must be >= 1", "record.budget_stride");
  if (record.snapshot_every < 0) throw ConfigError("record.snapshot_every must be >= 0", "record.snapshot_every");
  if (!(source_variance > 0.0)) throw ConfigError("physics.source_variance must be positive", "physics.source_variance");
  const Scenario &s = scenario;
  if (!(s.u0.norm2() < 1.0)) throw ConfigError("kick velocity must be sub-luminal", "scenario.u0x");
  if (!(s.u1.norm2() < 1.0)) throw ConfigError("second kick velocity must be sub-luminal", "scenario.u1x");
  if (!(s.ramp >= 0.0)) throw ConfigError("scenario.ramp must be >= 0", "scenario.ramp");
  if (s.kind == ScenarioKind::RestKick || s.kind == ScenarioKind::BoostedKick) {
    if (s.kick_time < 0.0 || s.kick_time > duration)
      throw ConfigError("scenario.kick_time must lie within the run", "scenario.kick_time");
  }
  if (s.kind == ScenarioKind::BoostedKick) {
    if (s.kick2_time < s.kick_time + s.ramp || s.kick2_time > duration)
      throw ConfigError("scenario.kick2_time must follow the first ramp and lie within the run", "scenario.kick2_time");
  }
  if (init == InitialField::Snapshot && init_snapshot.empty())
    throw ConfigError("init.field = snapshot requires init.snapshot", "init.snapshot");
  if (!(relax.damping > 0.0)) throw ConfigError("relax.damping must be positive", "relax.damping");
  if (!(relax.tolerance > 0.0)) throw ConfigError("relax.tolerance must be positive", "relax.tolerance");
  if (!(relax.max_periods > 0.0)) throw ConfigError("relax.max_periods must be positive", "relax.max_periods");
}

std::int64_t SimConfig::total_steps() const { return std::llround(duration / dt); }

// ---------------------------------------------------------------------------

CoupledStepper::CoupledStepper(const GridSpec &grid, const CouplingParams &params, double source_variance,
                               Gather gather)
    : grid_(grid), params_(params), modes_(grid, source_variance), field_(SpectralField::zeros(grid)) {
  const std::size_t M = grid.modes();
  gather_weight_.resize(M);
  for (int jy = 0; jy < grid.n(); ++jy) {
    for (int jx = 0; jx < grid.half(); ++jx) {
      const std::size_t i = modes_.index(jy, jx);
      const double k = gather == Gather::Matched ? modes_.kernel[i] : (modes_.derivative_zero(jy, jx) ? 0.0 : 1.0);
      gather_weight_[i] = k * modes_.weight[jx];
    }
  }
  phi0_.resize(M);
  eta0_.resize(M);
  accp_.resize(M);
  acce_.resize(M);
  sx_.resize(grid.half());
  gx_.resize(grid.half());
  sy_.resize(grid.n());
  gy_.resize(grid.n());
}

void CoupledStepper::compute_phases(const Vec2 &q, std::vector<Complex> &ex, std::vector<Complex> &ey) const {
  for (std::size_t j = 0; j < ex.size(); ++j) ex[j] = std::polar(1.0, modes_.kx[j] * q.x);
  for (std::size_t j = 0; j < ey.size(); ++j) ey[j] = std::polar(1.0, modes_.ky[j] * q.y);
}

PointSample CoupledStepper::gather_at(const Vec2 &q) {
  compute_phases(q, gx_, gy_);
  const int n = grid_.n(), h = grid_.half();
  double val = 0.0, ddx = 0.0, ddy = 0.0;
  for (int jy = 0; jy < n; ++jy) {
    const Complex *p = field_.phi.data() + modes_.index(jy, 0);
    const double *w = gather_weight_.data() + modes_.index(jy, 0);
    Complex sv = 0.0, sg = 0.0;
    for (int jx = 0; jx < h; ++jx) {
      const Complex z = p[jx] * gx_[jx] * w[jx];
      sv += z;
      sg += modes_.kx[jx] * z;
    }
    const Complex rv = sv * gy_[jy], rg = sg * gy_[jy];
    val += rv.real();
    ddx -= rg.imag();
    ddy -= modes_.ky[jy] * rv.imag();
  }
  const double inv = 1.0 / static_cast<double>(grid_.nodes());
  return PointSample{val * inv, Vec2{ddx * inv, ddy * inv}};
}

void CoupledStepper::reset(const SpectralField &field, const ParticleState &particle) {
  if (!(field.grid == grid_)) throw std::invalid_argument("field grid does not match stepper grid");
  field_ = field;
  particle_ = particle;
  gathered_ = gather_at(particle_.position);
}

void CoupledStepper::set_particle(const ParticleState &p) {
  particle_ = p;
  gathered_ = gather_at(p.position);
}

void CoupledStepper::step(double dt, const std::optional<Vec2> &kick_rate, bool coupled) {
  const int n = grid_.n(), h = grid_.half();
  const double b = coupled ? params_.b : 0.0;
  const double m = params_.m;
  const double inv_n = 1.0 / static_cast<double>(grid_.nodes());
  static constexpr double kNext[4] = {0.5, 0.5, 1.0, 0.0};
  static constexpr double kWeight[4] = {1.0, 2.0, 2.0, 1.0};

  std::copy(field_.phi.begin(), field_.phi.end(), phi0_.begin());
  std::copy(field_.eta.begin(), field_.eta.end(), eta0_.begin());
  std::fill(accp_.begin(), accp_.end(), Complex{});
  std::fill(acce_.begin(), acce_.end(), Complex{});

  const Vec2 q0 = particle_.position, g0 = particle_.g;
  Vec2 q = q0, g = g0, grad = gathered_.gradient;
  Vec2 dq_acc, dg_acc;
  PointSample sample = gathered_;

  for (int s = 0; s < 4; ++s) {
    const double gam = gamma_of(g);
    const Vec2 dq = g / gam;
    const Vec2 dg = kick_rate ? *kick_rate : grad * (b / gam);
    dq_acc += kWeight[s] * dq;
    dg_acc += kWeight[s] * dg;
    const bool last = s == 3;
    const double c = kNext[s] * dt;
    const Vec2 qn = last ? q0 + dq_acc * (dt / 6.0) : q0 + dq * c;
    const Vec2 gn = last ? g0 + dg_acc * (dt / 6.0) : g0 + dg * c;

    // Source spectrum at the current stage position.
    const double amp = b / (m * gam) / grid_.cell_area();
    const bool source = amp != 0.0;
    if (source) compute_phases(q, sx_, sy_);
    compute_phases(qn, gx_, gy_);

    const double w = kWeight[s];
    const double cf = last ? dt / 6.0 : c;
    double val = 0.0, ddx = 0.0, ddy = 0.0;
    for (int jy = 0; jy < n; ++jy) {
      const std::size_t r = modes_.index(jy, 0);
      Complex *P = field_.phi.data() + r;
      Complex *E = field_.eta.data() + r;
      const Complex *P0 = phi0_.data() + r;
      const Complex *E0 = eta0_.data() + r;
      Complex *AP = accp_.data() + r;
      Complex *AE = acce_.data() + r;
      const double *W2 = modes_.omega2.data() + r;
      const double *K = modes_.kernel.data() + r;
      const double *GW = gather_weight_.data() + r;
      const Complex row_src = source ? amp * std::conj(sy_[jy]) : Complex{};
      Complex sv = 0.0, sg = 0.0;
      for (int jx = 0; jx < h; ++jx) {
        const Complex kp = E[jx];
        Complex ke = -W2[jx] * P[jx];
        if (source) ke += row_src * std::conj(sx_[jx]) * K[jx];
        AP[jx] += w * kp;
        AE[jx] += w * ke;
        const Complex pn = last ? P0[jx] + cf * AP[jx] : P0[jx] + cf * kp;
        const Complex en = last ? E0[jx] + cf * AE[jx] : E0[jx] + cf * ke;
        P[jx] = pn;
        E[jx] = en;
        const Complex z = pn * gx_[jx] * GW[jx];
        sv += z;
        sg += modes_.kx[jx] * z;
      }
      const Complex rv = sv * gy_[jy], rg = sg * gy_[jy];
      val += rv.real();
      ddx -= rg.imag();
      ddy -= modes_.ky[jy] * rv.imag();
    }
    sample = PointSample{val * inv_n, Vec2{ddx * inv_n, ddy * inv_n}};
    q = qn;
    g = gn;
    grad = sample.gradient;
  }

  if (!grad.finite() || !std::isfinite(sample.value)) throw SolverError("non-finite field at particle");
  if (std::abs(sample.value) > kBlowup) throw SolverError("field blow-up: |phi| at particle = " + std::to_string(sample.value));
  if (!q.finite() || !g.finite()) throw SolverError("non-finite particle state");
  particle_.position = grid_.wrap(q);
  particle_.g = g;
  particle_.time += dt;
  field_.time += dt;
  // Wrapping shifts the phase by a multiple of 2 pi, so the sample stays valid.
  gathered_ = sample;
}

// ---------------------------------------------------------------------------

namespace {

struct KickPlan {
  std::int64_t start = 0;
  std::int64_t steps = 0;
  Vec2 target;
};

std::vector<KickPlan> kick_plans(const SimConfig &config) {
  const Scenario &sc = config.scenario;
  auto to_steps = [&](double t) { return static_cast<std::int64_t>(std::llround(t / config.dt)); };
  std::vector<KickPlan> kicks;
  if (sc.kind == ScenarioKind::RestKick || sc.kind == ScenarioKind::BoostedKick)
    kicks.push_back({to_steps(sc.kick_time), to_steps(sc.ramp), reduced_momentum_of(sc.u0)});
  if (sc.kind == ScenarioKind::BoostedKick)
    kicks.push_back({to_steps(sc.kick2_time), to_steps(sc.ramp), reduced_momentum_of(sc.u1)});
  return kicks;
}

double lz_field(const SpectralField &f, const ModeTable &modes, Fft2d &fft) {
  const GridSpec &g = modes.grid;
  std::vector<Complex> cx(f.phi.size()), cy(f.phi.size());
  const Complex I(0.0, 1.0);
  for (int jy = 0; jy < g.n(); ++jy) {
    for (int jx = 0; jx < g.half(); ++jx) {
      if (modes.derivative_zero(jy, jx)) continue;
      const std::size_t i = modes.index(jy, jx);
      cx[i] = I * modes.kx[jx] * f.phi[i];
      cy[i] = I * modes.ky[jy] * f.phi[i];
    }
  }
  const auto eta = fft.inverse(f.eta);
  const auto dx = fft.inverse(cx);
  const auto dy = fft.inverse(cy);
  const Vec2 c = g.center();
  const int n = g.n();
  double lz = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * n + ix;
      Vec2 r = g.node(ix, iy) - c;
      // The edge row and column sit at +-L/2; use their mean lever arm.
      if (ix == 0) r.x = 0.0;
      if (iy == 0) r.y = 0.0;
      lz += r.x * (-eta[i] * dy[i]) - r.y * (-eta[i] * dx[i]);
    }
  }
  return lz * g.mass() * g.mass() * g.cell_area();
}

std::string snapshot_name(const std::string &dir, std::int64_t step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_%09lld.pwf", static_cast<long long>(step));
  return (std::filesystem::path(dir) / buf).string();
}

}  // namespace

double ramp_end(const SimConfig &config) {
  double t = 0.0;
  for (const auto &k : kick_plans(config)) t = std::max(t, (k.start + k.steps) * config.dt);
  return t;
}

RunOutput run(const SimConfig &config, const RunOptions &options) {
  config.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  const GridSpec &grid = config.grid;
  const double m = config.params.m;
  const double dt = config.dt_natural();
  const std::int64_t nsteps = config.total_steps();
  const Scenario &sc = config.scenario;

  CoupledStepper stepper(grid, config.params, config.source_variance, config.gather);
  Fft2d fft(grid.n());

  SpectralField field = SpectralField::zeros(grid);
  ParticleState particle{grid.center(), Vec2{}, 0.0};
  Vec2 unwrapped = grid.center();
  double exchange = 0.0;
  Vec2 kick_from;
  std::int64_t step0 = 0;

  switch (config.init) {
    case InitialField::Zero: break;
    case InitialField::Static: field = to_spectral(relax_static(config), fft); break;
    case InitialField::Snapshot: {
      const FieldState fs = read_snapshot(config.init_snapshot);
      if (!(fs.grid == grid))
        throw ConfigError("snapshot grid does not match grid.n/grid.length/physics.m", "init.snapshot");
      field = to_spectral(fs, fft);
      const RestartState rs = read_restart_state(config.init_snapshot + ".state");
      particle = rs.particle;
      unwrapped = rs.unwrapped;
      exchange = rs.exchange;
      kick_from = rs.kick_from;
      step0 = rs.step;
      field.time = particle.time;
      break;
    }
  }
  field.time = step0 * dt;
  particle.time = step0 * dt;

  const bool coupled = sc.kind != ScenarioKind::FreeBallistic && config.params.b != 0.0;
  if (sc.kind == ScenarioKind::FreeBallistic && step0 == 0) particle.g = reduced_momentum_of(sc.u0);

  const std::vector<KickPlan> kicks = kick_plans(config);

  RunOutput out;
  out.config_echo = echo_config(config);
  out.ramp_end = ramp_end(config);

  stepper.reset(field, particle);

  const bool write_snaps = options.write_snapshots && config.record.snapshot_every > 0;
  if (write_snaps) std::filesystem::create_directories(config.output_dir);

  auto record = [&](std::int64_t s) {
    const ParticleState &p = stepper.particle();
    const PointSample &gs = stepper.gathered();
    const double t = s * config.dt;
    if (s % config.record.traj_stride == 0)
      out.trajectory.push_back({t, unwrapped / compton_length(m), p.g, gs.gradient, gs.value});
    if (s % config.record.budget_stride == 0) {
      BudgetSample bs;
      bs.t = t;
      bs.p_part = p.g * m;
      bs.e_part = m * p.gamma();
      bs.p_field = field_momentum(stepper.field(), stepper.modes());
      bs.e_field = field_energy(stepper.field(), stepper.modes());
      if (!std::isfinite(bs.e_field)) throw SolverError("field energy became non-finite", s);
      bs.exchange = exchange;
      bs.lz = lz_field(stepper.field(), stepper.modes(), fft) + (unwrapped - grid.center()).cross(p.g * m);
      out.budgets.push_back(bs);
    }
    if (options.observer)
      options.observer(StepView{s, t, stepper.field(), stepper.modes(), p, unwrapped});
  };

  // Kicks that start or end on step s act before s is recorded.
  auto apply_kicks = [&](std::int64_t s) {
    for (const auto &k : kicks) {
      if (s == k.start) kick_from = stepper.particle().g;
      if (s == k.start + k.steps) {
        ParticleState p = stepper.particle();
        p.g = k.target;
        stepper.set_particle(p);
      }
    }
  };

  apply_kicks(step0);
  record(step0);
  std::int64_t s = step0;
  const std::int64_t last = options.stop_after >= 0 ? std::min(nsteps, step0 + options.stop_after) : nsteps;
  while (s < last) {
    std::optional<Vec2> rate;
    for (const auto &k : kicks)
      if (k.steps > 0 && s >= k.start && s < k.start + k.steps) rate = (k.target - kick_from) / (k.steps * dt);

    const double phi_old = stepper.gathered().value;
    const double gam_old = stepper.particle().gamma();
    const Vec2 q_old = stepper.particle().position;
    try {
      stepper.step(dt, rate, coupled);
    } catch (const SolverError &e) {
      throw SolverError(e.what(), s + 1);
    }
    ++s;
    unwrapped += grid.separation(stepper.particle().position, q_old);
    if (coupled) {
      const double gam_new = stepper.particle().gamma();
      exchange += m * config.params.b * 0.5 * (1.0 / gam_old + 1.0 / gam_new) * (stepper.gathered().value - phi_old);
    }

    apply_kicks(s);

    const bool snap_now = write_snaps && s % config.record.snapshot_every == 0;
    const bool final_step = s == last;
    if (snap_now || (final_step && options.stop_after >= 0 && write_snaps)) {
      const std::string path = snapshot_name(config.output_dir, s);
      write_snapshot(path, to_grid(stepper.field(), fft));
      write_restart_state(path + ".state", RestartState{stepper.particle(), unwrapped, exchange, kick_from, s});
      out.snapshots.push_back(path);
    }
    record(s);
  }

  out.final_particle = stepper.particle();
  out.final_field = to_grid(stepper.field(), fft);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Complex> rest_source(const SimConfig &config, const ModeTable &modes, const Vec2 &center) {
  const GridSpec &g = config.grid;
  const double amp = config.params.b / config.params.m / g.cell_area();
  std::vector<Complex> s(g.modes());
  for (int jy = 0; jy < g.n(); ++jy) {
    for (int jx = 0; jx < g.half(); ++jx) {
      const std::size_t i = modes.index(jy, jx);
      s[i] = amp * modes.kernel[i] * std::polar(1.0, -(modes.kx[jx] * center.x + modes.ky[jy] * center.y));
    }
  }
  return s;
}

}  // namespace

FieldState static_field(const SimConfig &config, const Vec2 &center) {
  const ModeTable modes(config.grid, config.source_variance);
  const auto src = rest_source(config, modes, center);
  SpectralField f = SpectralField::zeros(config.grid);
  for (std::size_t i = 0; i < src.size(); ++i) f.phi[i] = src[i] / modes.omega2[i];
  Fft2d fft(config.grid.n());
  return to_grid(f, fft);
}

FieldState relax_static(const SimConfig &config) {
  config.validate();
  const GridSpec &g = config.grid;
  const ModeTable modes(g, config.source_variance);
  const auto src = rest_source(config, modes, g.center());
  const double nu = config.relax.damping * config.params.m;
  const double Tc = compton_period(config.params.m);
  const double dt = g.max_stable_dt();
  const auto per_period = static_cast<std::int64_t>(std::ceil(Tc / dt));
  const double h = Tc / static_cast<double>(per_period);
  const auto max_periods = static_cast<std::int64_t>(std::ceil(config.relax.max_periods));

  std::vector<Complex> phi(g.modes()), eta(g.modes()), prev(g.modes());
  for (std::int64_t period = 0; period < max_periods; ++period) {
    prev = phi;
    for (std::int64_t k = 0; k < per_period; ++k) {
      for (std::size_t i = 0; i < phi.size(); ++i) {
        const double w2 = modes.omega2[i];
        const Complex f = src[i];
        auto rhs = [&](Complex p, Complex e) { return std::pair{e, f - w2 * p - nu * e}; };
        const auto [kp1, ke1] = rhs(phi[i], eta[i]);
        const auto [kp2, ke2] = rhs(phi[i] + 0.5 * h * kp1, eta[i] + 0.5 * h * ke1);
        const auto [kp3, ke3] = rhs(phi[i] + 0.5 * h * kp2, eta[i] + 0.5 * h * ke2);
        const auto [kp4, ke4] = rhs(phi[i] + h * kp3, eta[i] + h * ke3);
        phi[i] += h / 6.0 * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
        eta[i] += h / 6.0 * (ke1 + 2.0 * ke2 + 2.0 * ke3 + ke4);
      }
    }
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      diff += std::norm(phi[i] - prev[i]);
      norm += std::norm(phi[i]);
    }
    if (norm == 0.0) {
      Fft2d fft(g.n());
      return to_grid(SpectralField{g, phi, eta, 0.0}, fft);
    }
    if (std::sqrt(diff / norm) < config.relax.tolerance) {
      Fft2d fft(g.n());
      FieldState out = to_grid(SpectralField{g, phi, eta, 0.0}, fft);
      return out;
    }
  }
  throw SolverError("static relaxation did not converge within " + std::to_string(max_periods) + " periods");
}

// ---------------------------------------------------------------------------

int worker_count() {
  if (const char *env = std::getenv("PWSIM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception &) {
    }
    throw ConfigError(std::string("PWSIM_THREADS must be a positive integer (got '") + env + "')");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<SweepResult> sweep(const SimConfig &base, const std::string &key, const std::vector<std::string> &values,
                               const RunOptions &options) {
  std::vector<SweepResult> results(values.size());
  if (values.empty()) return results;
  const int workers = std::min<int>(worker_count(), static_cast<int>(values.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepResult &r = results[i];
      r.value = values[i];
      try {
        SimConfig cfg = base;
        set_config_value(cfg, key, values[i]);
        cfg.output_dir = (std::filesystem::path(base.output_dir) / (key + "=" + values[i])).string();
        cfg.validate();
        r.output = run(cfg, options);
      } catch (const std::exception &e) {
        r.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto &t : pool) t.join();
  return results;
}

}  // namespace pwsim
