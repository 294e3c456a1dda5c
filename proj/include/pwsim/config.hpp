#pragma once

#include "pwsim/simulation.hpp"

#include <string>
#include <vector>

namespace pwsim {

/// Flat `section.key = value` configuration. Blank lines and `#` comments are
/// ignored. Every key below is optional and defaults to SimConfig's values.
///
///   grid.n, grid.length                      points per axis, side in Compton wavelengths
///   physics.m, physics.b                     mass, coupling
///   physics.source_variance                  Gaussian variance in units of 1/m^2 (default 2)
///   physics.gather                           matched | point
///   time.dt, time.duration                   Compton periods
///   scenario.kind                            rest-kick | boosted-kick | stationary | free-ballistic
///   scenario.u0x, scenario.u0y               (first) kick velocity
///   scenario.kick_time, scenario.ramp        Compton periods
///   scenario.u1x, scenario.u1y, scenario.kick2_time   second kick (boosted-kick)
///   record.traj_stride, record.budget_stride steps between samples
///   record.snapshot_every                    steps between snapshots, 0 = none
///   init.field                               zero | static | snapshot
///   init.snapshot                            PWF1 path to resume from
///   relax.damping, relax.tolerance, relax.max_periods
///   output.dir
const std::vector<std::string> &config_keys();

/// Applies one key. Throws ConfigError (with the key) for unknown keys or
/// malformed values.
void set_config_value(SimConfig &config, const std::string &key, const std::string &value);

/// Parses text, then `overrides` (each "key=value"), then validates. Errors
/// carry the key and the 1-based line number (0 for overrides).
SimConfig parse_config_text(const std::string &text, const std::vector<std::string> &overrides = {});
SimConfig parse_config(const std::string &path, const std::vector<std::string> &overrides = {});

/// Full config with every key materialized; parses back to an identical
/// SimConfig.
std::string echo_config(const SimConfig &config);

bool operator==(const SimConfig &a, const SimConfig &b);

}  // namespace pwsim
