#include "pwsim/config.hpp"

#include "pwsim/error.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace pwsim {
namespace {

std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string &key, const std::string &v) {
  errno = 0;
  char *end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d))
    throw ConfigError("malformed number '" + v + "' for " + key, key);
  return d;
}

int to_int(const std::string &key, const std::string &v) {
  errno = 0;
  char *end = nullptr;
  const long d = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || d < INT32_MIN || d > INT32_MAX)
    throw ConfigError("malformed integer '" + v + "' for " + key, key);
  return static_cast<int>(d);
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string init_name(InitialField f) {
  switch (f) {
    case InitialField::Zero: return "zero";
    case InitialField::Static: return "static";
    case InitialField::Snapshot: return "snapshot";
  }
  return "zero";
}

}  // namespace

const std::vector<std::string> &config_keys() {
  static const std::vector<std::string> keys = {
      "grid.n",          "grid.length",        "physics.m",           "physics.b",
      "physics.source_variance", "physics.gather", "time.dt",          "time.duration",
      "scenario.kind",   "scenario.u0x",       "scenario.u0y",        "scenario.kick_time",
      "scenario.ramp",   "scenario.u1x",       "scenario.u1y",        "scenario.kick2_time",
      "record.traj_stride", "record.budget_stride", "record.snapshot_every", "init.field",
      "init.snapshot",   "relax.damping",      "relax.tolerance",     "relax.max_periods",
      "output.dir"};
  return keys;
}

void set_config_value(SimConfig &c, const std::string &key, const std::string &value) {
  const GridSpec &g = c.grid;
  const double var_units = c.source_variance * c.params.m * c.params.m;
  if (key == "grid.n") {
    c.grid = GridSpec(to_int(key, value), g.length(), g.mass());
  } else if (key == "grid.length") {
    c.grid = GridSpec(g.n(), to_double(key, value), g.mass());
  } else if (key == "physics.m") {
    const double m = to_double(key, value);
    c.grid = GridSpec(g.n(), g.length(), m);
    c.params.m = m;
    c.source_variance = var_units / (m * m);
  } else if (key == "physics.b") {
    c.params.b = to_double(key, value);
  } else if (key == "physics.source_variance") {
    c.source_variance = to_double(key, value) / (c.params.m * c.params.m);
  } else if (key == "physics.gather") {
    if (value == "matched") c.gather = Gather::Matched;
    else if (value == "point") c.gather = Gather::Point;
    else throw ConfigError("physics.gather must be matched or point (got '" + value + "')", key);
  } else if (key == "time.dt") {
    c.dt = to_double(key, value);
  } else if (key == "time.duration") {
    c.duration = to_double(key, value);
  } else if (key == "scenario.kind") {
    c.scenario.kind = scenario_kind_from(value);
  } else if (key == "scenario.u0x") {
    c.scenario.u0.x = to_double(key, value);
  } else if (key == "scenario.u0y") {
    c.scenario.u0.y = to_double(key, value);
  } else if (key == "scenario.kick_time") {
    c.scenario.kick_time = to_double(key, value);
  } else if (key == "scenario.ramp") {
    c.scenario.ramp = to_double(key, value);
  } else if (key == "scenario.u1x") {
    c.scenario.u1.x = to_double(key, value);
  } else if (key == "scenario.u1y") {
    c.scenario.u1.y = to_double(key, value);
  } else if (key == "scenario.kick2_time") {
    c.scenario.kick2_time = to_double(key, value);
  } else if (key == "record.traj_stride") {
    c.record.traj_stride = to_int(key, value);
  } else if (key == "record.budget_stride") {
    c.record.budget_stride = to_int(key, value);
  } else if (key == "record.snapshot_every") {
    c.record.snapshot_every = to_int(key, value);
  } else if (key == "init.field") {
    if (value == "zero") c.init = InitialField::Zero;
    else if (value == "static") c.init = InitialField::Static;
    else if (value == "snapshot") c.init = InitialField::Snapshot;
    else throw ConfigError("init.field must be zero, static or snapshot (got '" + value + "')", key);
  } else if (key == "init.snapshot") {
    c.init_snapshot = value;
  } else if (key == "relax.damping") {
    c.relax.damping = to_double(key, value);
  } else if (key == "relax.tolerance") {
    c.relax.tolerance = to_double(key, value);
  } else if (key == "relax.max_periods") {
    c.relax.max_periods = to_double(key, value);
  } else if (key == "output.dir") {
    if (value.empty()) throw ConfigError("output.dir must not be empty", key);
    c.output_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'", key);
  }
}

SimConfig parse_config_text(const std::string &text, const std::vector<std::string> &overrides) {
  SimConfig c;
  std::map<std::string, int> line_of;
  auto apply = [&](const std::string &raw, int line) {
    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'" + (line ? " on line " + std::to_string(line) : std::string{}), {}, line);
    const std::string key = trim(raw.substr(0, eq));
    const std::string value = trim(raw.substr(eq + 1));
    try {
      set_config_value(c, key, value);
    } catch (const ConfigError &e) {
      const std::string where = line ? " (line " + std::to_string(line) + ")" : " (override)";
      throw ConfigError(e.what() + where, e.key().empty() ? key : e.key(), line);
    }
    line_of[key] = line;
  };

  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    if (trim(raw).empty()) continue;
    apply(raw, line);
  }
  for (const auto &o : overrides) apply(o, 0);

  try {
    c.validate();
  } catch (const ConfigError &e) {
    const auto it = line_of.find(e.key());
    const int l = it == line_of.end() ? 0 : it->second;
    throw ConfigError(std::string(e.what()) + (l ? " (line " + std::to_string(l) + ")" : std::string{}), e.key(), l);
  }
  return c;
}

SimConfig parse_config(const std::string &path, const std::vector<std::string> &overrides) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config file", path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::string echo_config(const SimConfig &c) {
  const double m = c.params.m;
  std::ostringstream os;
  os << "# lengths in Compton wavelengths, times in Compton periods\n";
  os << "grid.n = " << c.grid.n() << "\n";
  os << "grid.length = " << fmt(c.grid.length()) << "\n";
  os << "physics.m = " << fmt(m) << "\n";
  os << "physics.b = " << fmt(c.params.b) << "\n";
  os << "physics.source_variance = " << fmt(c.source_variance * m * m) << "\n";
  os << "physics.gather = " << (c.gather == Gather::Matched ? "matched" : "point") << "\n";
  os << "time.dt = " << fmt(c.dt) << "\n";
  os << "time.duration = " << fmt(c.duration) << "\n";
  os << "scenario.kind = " << to_string(c.scenario.kind) << "\n";
  os << "scenario.u0x = " << fmt(c.scenario.u0.x) << "\n";
  os << "scenario.u0y = " << fmt(c.scenario.u0.y) << "\n";
  os << "scenario.kick_time = " << fmt(c.scenario.kick_time) << "\n";
  os << "scenario.ramp = " << fmt(c.scenario.ramp) << "\n";
  os << "scenario.u1x = " << fmt(c.scenario.u1.x) << "\n";
  os << "scenario.u1y = " << fmt(c.scenario.u1.y) << "\n";
  os << "scenario.kick2_time = " << fmt(c.scenario.kick2_time) << "\n";
  os << "record.traj_stride = " << c.record.traj_stride << "\n";
  os << "record.budget_stride = " << c.record.budget_stride << "\n";
  os << "record.snapshot_every = " << c.record.snapshot_every << "\n";
  os << "init.field = " << init_name(c.init) << "\n";
  if (!c.init_snapshot.empty()) os << "init.snapshot = " << c.init_snapshot << "\n";
  os << "relax.damping = " << fmt(c.relax.damping) << "\n";
  os << "relax.tolerance = " << fmt(c.relax.tolerance) << "\n";
  os << "relax.max_periods = " << fmt(c.relax.max_periods) << "\n";
  os << "output.dir = " << c.output_dir << "\n";
  return os.str();
}

bool operator==(const SimConfig &a, const SimConfig &b) {
  return a.grid == b.grid && a.params.m == b.params.m && a.params.b == b.params.b && a.dt == b.dt &&
         a.duration == b.duration && a.scenario.kind == b.scenario.kind && a.scenario.u0 == b.scenario.u0 &&
         a.scenario.kick_time == b.scenario.kick_time && a.scenario.ramp == b.scenario.ramp &&
         a.scenario.u1 == b.scenario.u1 && a.scenario.kick2_time == b.scenario.kick2_time &&
         a.record.traj_stride == b.record.traj_stride && a.record.budget_stride == b.record.budget_stride &&
         a.record.snapshot_every == b.record.snapshot_every && a.init == b.init && a.init_snapshot == b.init_snapshot &&
         a.source_variance == b.source_variance && a.gather == b.gather && a.relax.damping == b.relax.damping &&
         a.relax.tolerance == b.relax.tolerance && a.relax.max_periods == b.relax.max_periods &&
         a.output_dir == b.output_dir;
}

}  // namespace pwsim
