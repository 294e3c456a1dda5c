#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pwsim::cli {

enum class Subcommand { Run, Sweep, Analyze, Predict, Relax };

struct Command {
  Subcommand sub = Subcommand::Run;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;  // key=value; a comma-separated value makes a sweep axis
  std::optional<double> b, u, u0, v, m;
};

/// Throws ConfigError on usage errors. Returns nullopt after --help.
std::optional<Command> parse_command(int argc, const char *const *argv, std::ostream &out);

/// 0 on success, 1 on a runtime fault, 2 on a configuration error.
int run_command(const Command &cmd, std::ostream &out, std::ostream &err);

int main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace pwsim::cli
