#pragma once

#include "pwsim/grid.hpp"

#include <functional>

namespace pwsim {

struct CouplingParams {
  double m = 1.0;
  double b = 0.0;

  void validate() const;
};

/// Point particle in natural units. `g` is the reduced momentum gamma*u, so
/// the spatial momentum is m*g and the on-shell identity gamma^2 - |g|^2 = 1
/// holds by construction.
struct ParticleState {
  Vec2 position;
  Vec2 g;
  double time = 0.0;

  double gamma() const;
  Vec2 velocity() const;
  bool finite() const { return position.finite() && g.finite() && std::isfinite(time); }
};

double gamma_of(const Vec2 &g);
Vec2 velocity_of(const Vec2 &g);
/// gamma(u) * u; rejects |u| >= 1.
Vec2 reduced_momentum_of(const Vec2 &u);

using GradientProvider = std::function<Vec2(const Vec2 &)>;

/// One RK4 step of dg/dt = (b/gamma) grad phi(q), dq/dt = g/gamma with the
/// field frozen over the step. `period` > 0 wraps the position onto
/// [0, period)^2. Negative dt integrates backwards.
ParticleState step_particle(const ParticleState &p, const GradientProvider &grad,
                            const CouplingParams &params, double dt, double period = 0.0);

/// Externally prescribed change of g: linear in time from `g_from` to `g_to`
/// over [start, start + ramp]. While active it replaces the force law.
struct KickSchedule {
  double start = 0.0;
  double ramp = 0.0;
  Vec2 g_from;
  Vec2 g_to;

  double end() const { return start + ramp; }
  bool active(double t) const { return t >= start && t < end(); }
  Vec2 g_at(double t) const;
  /// Constant dg/dt applied during the ramp (zero for instantaneous kicks).
  Vec2 rate() const;
};

/// Kick from the particle's current momentum to gamma(u0) u0, starting now.
KickSchedule kick(const ParticleState &p, const Vec2 &u0, double ramp);

}  // namespace pwsim
