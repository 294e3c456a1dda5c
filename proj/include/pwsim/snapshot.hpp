#pragma once

#include "pwsim/field.hpp"
#include "pwsim/simulation.hpp"

#include <string>

namespace pwsim {

/// PWF1 field snapshot: "PWF1", u32 version, u32 nx, u32 ny, f64 length
/// (Compton wavelengths), f64 time (Compton periods), f64 m, then row-major
/// f64 phi and f64 eta. Little-endian.
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const std::string &path, const FieldState &state);
FieldState read_snapshot(const std::string &path);

/// Sidecar text file (`<snapshot>.state`) with the particle and budget
/// accumulators needed to resume a run.
void write_restart_state(const std::string &path, const RestartState &state);
RestartState read_restart_state(const std::string &path);

}  // namespace pwsim
