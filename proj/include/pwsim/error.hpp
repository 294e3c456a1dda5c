#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pwsim {

/// Invalid argument or configuration value.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string &what, std::string key = {}, int line = 0)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}
  const std::string &key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

/// Numerical fault during time integration (blow-up, non-finite values,
/// failure to converge).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string &what, std::int64_t step = -1)
      : std::runtime_error(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string &what, std::string path)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}
  const std::string &path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace pwsim
