#include "pwsim/particle.hpp"

#include "pwsim/error.hpp"

#include <string>

namespace pwsim {

void CouplingParams::validate() const {
  if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("mass must be positive", "physics.m");
  if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("coupling b must be >= 0", "physics.b");
}

double gamma_of(const Vec2 &g) { return std::sqrt(1.0 + g.norm2()); }

Vec2 velocity_of(const Vec2 &g) { return g / gamma_of(g); }

Vec2 reduced_momentum_of(const Vec2 &u) {
  const double u2 = u.norm2();
  if (!(u2 < 1.0)) throw ConfigError("velocity must be sub-luminal (|u| = " + std::to_string(std::sqrt(u2)) + ")");
  return u / std::sqrt(1.0 - u2);
}

double ParticleState::gamma() const { return gamma_of(g); }
Vec2 ParticleState::velocity() const { return velocity_of(g); }

ParticleState step_particle(const ParticleState &p, const GradientProvider &grad,
                            const CouplingParams &params, double dt, double period) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw ConfigError("particle timestep must be finite and nonzero");
  if (!p.finite()) throw SolverError("non-finite particle state");

  struct Deriv {
    Vec2 dq, dg;
  };
  auto rhs = [&](const Vec2 &q, const Vec2 &g) {
    const double gam = gamma_of(g);
    const Vec2 f = grad(q);
    if (!f.finite()) throw SolverError("non-finite field gradient at particle");
    return Deriv{g / gam, f * (params.b / gam)};
  };

  const Deriv k1 = rhs(p.position, p.g);
  const Deriv k2 = rhs(p.position + k1.dq * (0.5 * dt), p.g + k1.dg * (0.5 * dt));
  const Deriv k3 = rhs(p.position + k2.dq * (0.5 * dt), p.g + k2.dg * (0.5 * dt));
  const Deriv k4 = rhs(p.position + k3.dq * dt, p.g + k3.dg * dt);

  ParticleState out;
  out.position = p.position + (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq) * (dt / 6.0);
  out.g = p.g + (k1.dg + 2.0 * k2.dg + 2.0 * k3.dg + k4.dg) * (dt / 6.0);
  out.time = p.time + dt;
  if (period > 0.0) {
    auto wrap = [period](double v) {
      double w = std::fmod(v, period);
      if (w < 0.0) w += period;
      return w >= period ? w - period : w;
    };
    out.position = {wrap(out.position.x), wrap(out.position.y)};
  }
  return out;
}

Vec2 KickSchedule::g_at(double t) const {
  if (t <= start) return ramp > 0.0 ? g_from : g_to;
  if (t >= end()) return g_to;
  const double s = (t - start) / ramp;
  return g_from + (g_to - g_from) * s;
}

Vec2 KickSchedule::rate() const { return ramp > 0.0 ? (g_to - g_from) / ramp : Vec2{}; }

KickSchedule kick(const ParticleState &p, const Vec2 &u0, double ramp) {
  if (!(ramp >= 0.0) || !std::isfinite(ramp)) throw ConfigError("kick ramp must be >= 0", "scenario.ramp");
  return KickSchedule{p.time, ramp, p.g, reduced_momentum_of(u0)};
}

}  // namespace pwsim
