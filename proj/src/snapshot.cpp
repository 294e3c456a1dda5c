#include "pwsim/snapshot.hpp"

#include "pwsim/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace pwsim {
namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <class T>
void put(std::ostream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T>
T get(std::istream &is, const std::string &path) {
  T v;
  if (!is.read(reinterpret_cast<char *>(&v), sizeof(T))) throw IoError("truncated snapshot", path);
  return v;
}

std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_snapshot(const std::string &path, const FieldState &s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open snapshot for writing", path);
  const GridSpec &g = s.grid;
  os.write("PWF1", 4);
  put<std::uint32_t>(os, kSnapshotVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put<double>(os, g.length());
  put<double>(os, s.time / compton_period(g.mass()));
  put<double>(os, g.mass());
  os.write(reinterpret_cast<const char *>(s.phi.data()), static_cast<std::streamsize>(s.phi.size() * sizeof(double)));
  os.write(reinterpret_cast<const char *>(s.eta.data()), static_cast<std::streamsize>(s.eta.size() * sizeof(double)));
  if (!os) throw IoError("failed writing snapshot", path);
}

FieldState read_snapshot(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open snapshot", path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "PWF1", 4) != 0) throw IoError("not a PWF1 snapshot", path);
  const auto version = get<std::uint32_t>(is, path);
  if (version != kSnapshotVersion) throw IoError("unsupported snapshot version " + std::to_string(version), path);
  const auto nx = get<std::uint32_t>(is, path);
  const auto ny = get<std::uint32_t>(is, path);
  if (nx != ny) throw IoError("non-square snapshot grids are not supported", path);
  const double length = get<double>(is, path);
  const double time = get<double>(is, path);
  const double m = get<double>(is, path);
  FieldState s = FieldState::zeros(GridSpec(static_cast<int>(nx), length, m));
  s.time = time * compton_period(m);
  const auto bytes = static_cast<std::streamsize>(s.phi.size() * sizeof(double));
  if (!is.read(reinterpret_cast<char *>(s.phi.data()), bytes) || !is.read(reinterpret_cast<char *>(s.eta.data()), bytes))
    throw IoError("truncated snapshot", path);
  return s;
}

void write_restart_state(const std::string &path, const RestartState &r) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open restart state for writing", path);
  os << "# particle state for resuming from the matching PWF1 snapshot (natural units)\n";
  os << "step = " << r.step << "\n";
  os << "time = " << fmt17(r.particle.time) << "\n";
  os << "x = " << fmt17(r.particle.position.x) << "\n";
  os << "y = " << fmt17(r.particle.position.y) << "\n";
  os << "x_unwrapped = " << fmt17(r.unwrapped.x) << "\n";
  os << "y_unwrapped = " << fmt17(r.unwrapped.y) << "\n";
  os << "gx = " << fmt17(r.particle.g.x) << "\n";
  os << "gy = " << fmt17(r.particle.g.y) << "\n";
  os << "exchange = " << fmt17(r.exchange) << "\n";
  os << "kick_from_x = " << fmt17(r.kick_from.x) << "\n";
  os << "kick_from_y = " << fmt17(r.kick_from.y) << "\n";
  if (!os) throw IoError("failed writing restart state", path);
}

RestartState read_restart_state(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open restart state", path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("malformed restart line '" + line + "'", path);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto num = [&](const std::string &k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw IoError("restart state lacks '" + k + "'", path);
    return std::stod(it->second);
  };
  RestartState r;
  r.step = static_cast<std::int64_t>(num("step"));
  r.particle.time = num("time");
  r.particle.position = {num("x"), num("y")};
  r.unwrapped = {num("x_unwrapped"), num("y_unwrapped")};
  r.particle.g = {num("gx"), num("gy")};
  r.exchange = num("exchange");
  r.kick_from = {num("kick_from_x"), num("kick_from_y")};
  return r;
}

}  // namespace pwsim
