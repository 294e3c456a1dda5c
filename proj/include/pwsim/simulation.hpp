#pragma once

#include "pwsim/field.hpp"
#include "pwsim/particle.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pwsim {

enum class ScenarioKind { RestKick, BoostedKick, Stationary, FreeBallistic };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from(const std::string &name);

/// Times are in Compton periods, velocities in units of c.
struct Scenario {
  ScenarioKind kind = ScenarioKind::RestKick;
  Vec2 u0{0.35, 0.0};
  double kick_time = 0.0;
  double ramp = 0.5;
  // boosted-kick only: second kick to u1 at kick2_time.
  Vec2 u1{0.0, 0.0};
  double kick2_time = 0.0;
};

struct RecordPlan {
  int traj_stride = 10;
  int budget_stride = 50;
  int snapshot_every = 0;  // steps between snapshots, 0 disables
};

enum class InitialField { Zero, Static, Snapshot };
/// Gather kernel used for the particle force. Matched weights every mode by
/// the source's Gaussian, which keeps the discrete momentum exchange exactly
/// antisymmetric; point evaluates the raw band-limited interpolant.
enum class Gather { Matched, Point };

struct RelaxOptions {
  double damping = 1.0;       // uniform eta damping rate, units of m
  double tolerance = 1e-4;    // per-period relative change
  double max_periods = 200.0;
};

struct SimConfig {
  GridSpec grid{512, 32.0, 1.0};
  CouplingParams params{1.0, 53.3};
  double dt = 0.002;        // Compton periods
  double duration = 50.0;   // Compton periods
  Scenario scenario;
  RecordPlan record;
  InitialField init = InitialField::Zero;
  std::string init_snapshot;
  double source_variance = 2.0;  // per-axis, natural units (2/m^2 at m = 1)
  Gather gather = Gather::Matched;
  RelaxOptions relax;
  std::string output_dir = "out";

  /// Throws ConfigError naming the offending key.
  void validate() const;
  std::int64_t total_steps() const;
  double dt_natural() const { return dt * compton_period(params.m); }
};

struct TrajectorySample {
  double t = 0.0;     // Compton periods
  Vec2 position;      // unwrapped, Compton wavelengths
  Vec2 g;             // reduced momentum
  Vec2 grad_phi;      // gathered gradient, natural units
  double phi = 0.0;   // gathered field value at the particle
};

struct BudgetSample {
  double t = 0.0;  // Compton periods
  Vec2 p_part, p_field;
  double e_part = 0.0, e_field = 0.0;
  double exchange = 0.0;  // running integral of m b / gamma d(phi_p)
  double lz = 0.0;        // field + particle, about the domain center
};

struct RunOutput {
  std::vector<TrajectorySample> trajectory;
  std::vector<BudgetSample> budgets;
  std::vector<std::string> snapshots;
  std::string config_echo;
  double wall_seconds = 0.0;
  double ramp_end = 0.0;  // Compton periods; budgets are meaningful after this
  ParticleState final_particle;
  FieldState final_field;
};

/// Read-only view handed to run observers after every step.
struct StepView {
  std::int64_t step;
  double t;  // Compton periods
  const SpectralField &field;
  const ModeTable &modes;
  const ParticleState &particle;
  Vec2 unwrapped;  // natural units
};

using StepObserver = std::function<void(const StepView &)>;

/// Particle state persisted next to a field snapshot so runs can resume.
struct RestartState {
  ParticleState particle;  // position wrapped, natural units
  Vec2 unwrapped;          // natural units
  double exchange = 0.0;
  Vec2 kick_from;
  std::int64_t step = 0;
};

/// Fused spectral RK4 for the coupled field and particle. Field and particle
/// stages share one right-hand side evaluation, the source is injected from
/// its analytic Gaussian spectrum, and the force is gathered by direct
/// summation over modes, so no transforms occur inside the time loop.
class CoupledStepper {
 public:
  CoupledStepper(const GridSpec &grid, const CouplingParams &params, double source_variance, Gather gather);

  void reset(const SpectralField &field, const ParticleState &particle);
  /// Advances one step of `dt` (natural units). While `kick_rate` is set the
  /// particle momentum follows it instead of the force law; `coupled` false
  /// switches off both source and force.
  void step(double dt, const std::optional<Vec2> &kick_rate, bool coupled = true);

  const SpectralField &field() const { return field_; }
  const ParticleState &particle() const { return particle_; }
  void set_particle(const ParticleState &p);
  const ModeTable &modes() const { return modes_; }
  /// Gathered field value and gradient at the current particle position.
  const PointSample &gathered() const { return gathered_; }

 private:
  void compute_phases(const Vec2 &q, std::vector<Complex> &ex, std::vector<Complex> &ey) const;
  PointSample gather_at(const Vec2 &q);

  GridSpec grid_;
  CouplingParams params_;
  ModeTable modes_;
  std::vector<double> gather_weight_;
  SpectralField field_;
  ParticleState particle_;
  PointSample gathered_;
  std::vector<Complex> phi0_, eta0_, accp_, acce_;
  std::vector<Complex> sx_, sy_, gx_, gy_;
};

struct RunOptions {
  StepObserver observer;
  bool write_snapshots = true;
  /// Stops after this many steps (for restart tests); negative runs to the end.
  std::int64_t stop_after = -1;
};

RunOutput run(const SimConfig &config, const RunOptions &options = {});
/// Time (Compton periods) at which the last kick of the scenario completes.
double ramp_end(const SimConfig &config);

/// Field of a particle held at the domain center after damped relaxation.
FieldState relax_static(const SimConfig &config);

/// Directly solved static field (S_k / (m^2 + k^2)) of a particle at rest at
/// `center`, used as the reference fixed point of relax_static.
FieldState static_field(const SimConfig &config, const Vec2 &center);

struct SweepResult {
  std::string value;
  std::optional<RunOutput> output;
  std::string error;
};

/// Runs `base` once per value of `key`, in parallel up to the worker cap
/// (PWSIM_THREADS, default hardware concurrency). Failures are captured per
/// run.
std::vector<SweepResult> sweep(const SimConfig &base, const std::string &key, const std::vector<std::string> &values,
                               const RunOptions &options = {});

int worker_count();

}  // namespace pwsim
