#include "pwsim/io.hpp"

#include "pwsim/config.hpp"
#include "pwsim/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pwsim::io {
namespace {

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

// Shortest representation that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::ofstream open_out(const std::string &path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw IoError("cannot open for writing", path);
  return os;
}

void metadata(std::ostream &os, const SimConfig &c) {
  os << "# grid.n = " << c.grid.n() << ", grid.length = " << num(c.grid.length()) << " lambda_c, physics.m = "
     << num(c.params.m) << ", physics.b = " << num(c.params.b) << ", time.dt = " << num(c.dt) << " T_c\n";
}

std::vector<std::vector<double>> read_table(const std::string &path, std::size_t columns) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open", path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof() || row.size() != columns)
      throw IoError("malformed row at line " + std::to_string(lineno) + " (expected " + std::to_string(columns) +
                        " numbers)",
                    path);
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
void put(std::ostream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T>
T get(std::istream &is, const std::string &path) {
  T v;
  if (!is.read(reinterpret_cast<char *>(&v), sizeof(T))) throw IoError("truncated file", path);
  return v;
}

void put_array(std::ostream &os, const std::vector<double> &v) {
  os.write(reinterpret_cast<const char *>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_array(std::istream &is, std::size_t n, const std::string &path) {
  std::vector<double> v(n);
  if (!is.read(reinterpret_cast<char *>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
    throw IoError("truncated file", path);
  return v;
}

}  // namespace

void write_trajectory(const std::string &path, std::span<const TrajectorySample> rows, const SimConfig &config) {
  auto os = open_out(path);
  os << "# pwsim trajectory\n";
  metadata(os, config);
  os << "# t [T_c], x y [lambda_c, unwrapped], g = gamma u, gradphi [natural units], phi at particle\n";
  os << "# t x y g_x g_y gradphi_x gradphi_y phi\n";
  for (const auto &r : rows)
    os << num(r.t) << ' ' << num(r.position.x) << ' ' << num(r.position.y) << ' ' << num(r.g.x) << ' '
       << num(r.g.y) << ' ' << num(r.grad_phi.x) << ' ' << num(r.grad_phi.y) << ' ' << num(r.phi) << '\n';
  if (!os) throw IoError("failed writing", path);
}

std::vector<TrajectorySample> read_trajectory(const std::string &path) {
  std::vector<TrajectorySample> out;
  for (const auto &r : read_table(path, 8))
    out.push_back({r[0], {r[1], r[2]}, {r[3], r[4]}, {r[5], r[6]}, r[7]});
  return out;
}

void write_budgets(const std::string &path, std::span<const BudgetSample> rows, const SimConfig &config) {
  auto os = open_out(path);
  os << "# pwsim budgets\n";
  metadata(os, config);
  os << "# t [T_c]; momenta, energies, exchange and lz in natural units (m = physics.m)\n";
  os << "# t p_part_x p_part_y p_field_x p_field_y e_part e_field exchange lz\n";
  for (const auto &r : rows)
    os << num(r.t) << ' ' << num(r.p_part.x) << ' ' << num(r.p_part.y) << ' ' << num(r.p_field.x) << ' '
       << num(r.p_field.y) << ' ' << num(r.e_part) << ' ' << num(r.e_field) << ' ' << num(r.exchange) << ' '
       << num(r.lz) << '\n';
  if (!os) throw IoError("failed writing", path);
}

std::vector<BudgetSample> read_budgets(const std::string &path) {
  std::vector<BudgetSample> out;
  for (const auto &r : read_table(path, 9))
    out.push_back({r[0], {r[1], r[2]}, {r[3], r[4]}, r[5], r[6], r[7], r[8]});
  return out;
}

void Report::comment(const std::string &text) { lines_.emplace_back(std::string{}, text); }
void Report::set(const std::string &key, double value) { set(key, num(value)); }
void Report::set(const std::string &key, const Vec2 &v) { set(key, num(v.x) + " " + num(v.y)); }

void Report::set(const std::string &key, const std::string &value) {
  if (key.empty() || key.find_first_of(" =#\n") != std::string::npos)
    throw std::invalid_argument("bad report key '" + key + "'");
  auto it = std::find_if(lines_.begin(), lines_.end(), [&](const auto &l) { return l.first == key; });
  if (it != lines_.end()) it->second = value;
  else lines_.emplace_back(key, value);
}

std::string Report::text() const {
  std::string s;
  for (const auto &[k, v] : lines_) s += k.empty() ? "# " + v + "\n" : k + " = " + v + "\n";
  return s;
}

void Report::write(const std::string &path) const {
  auto os = open_out(path);
  os << text();
  if (!os) throw IoError("failed writing", path);
}

std::map<std::string, std::string> read_report(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open", path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw IoError("malformed report line " + std::to_string(lineno), path);
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

double report_number(const std::map<std::string, std::string> &report, const std::string &key) {
  const auto it = report.find(key);
  if (it == report.end()) throw std::out_of_range("report has no key '" + key + "'");
  return std::stod(it->second);
}

void write_spectrogram(const std::string &path, const diag::Spectrogram &s) {
  auto os = open_out(path, std::ios::binary);
  os.write("PWS1", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.n_times()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.n_freqs()));
  put<double>(os, s.sample_dt);
  put<double>(os, s.window);
  put<double>(os, s.hop);
  put<double>(os, s.scale);
  put_array(os, s.times);
  put_array(os, s.frequencies);
  put_array(os, s.magnitude);
  if (!os) throw IoError("failed writing", path);
}

diag::Spectrogram read_spectrogram(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open", path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "PWS1", 4) != 0) throw IoError("not a PWS1 spectrogram", path);
  const auto version = get<std::uint32_t>(is, path);
  if (version != 1) throw IoError("unsupported spectrogram version " + std::to_string(version), path);
  const auto nt = get<std::uint32_t>(is, path);
  const auto nf = get<std::uint32_t>(is, path);
  diag::Spectrogram s;
  s.sample_dt = get<double>(is, path);
  s.window = get<double>(is, path);
  s.hop = get<double>(is, path);
  s.scale = get<double>(is, path);
  s.frame_samples = static_cast<int>(std::lround(s.window / s.sample_dt));
  s.fft_samples = nf > 0 ? 2 * (static_cast<int>(nf) - 1) : 0;
  s.times = get_array(is, nt, path);
  s.frequencies = get_array(is, nf, path);
  s.magnitude = get_array(is, static_cast<std::size_t>(nt) * nf, path);
  return s;
}

void emit_heatmap(const FieldState &snapshot, const std::string &path, const HeatmapOptions &options) {
  const int n = snapshot.grid.n();
  const auto &phi = snapshot.phi;
  if (phi.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("snapshot size does not match grid");
  const auto [lo_it, hi_it] = std::minmax_element(phi.begin(), phi.end());
  const double lo = *lo_it, hi = *hi_it;

  std::vector<unsigned char> px(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double u;  // in [0, 1]
    if (options.normalization == Normalization::Linear) u = hi > lo ? (phi[i] - lo) / (hi - lo) : 0.5;
    else u = std::atan(options.c * phi[i]) / std::numbers::pi + 0.5;
    px[i] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(u, 0.0, 1.0)));
  }

  auto os = open_out(path, std::ios::binary);
  os << "P5\n" << n << ' ' << n << "\n255\n";
  os.write(reinterpret_cast<const char *>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!os) throw IoError("failed writing", path);

  auto side = open_out(path + ".map");
  side << "# pwsim heatmap mapping\n";
  side << "width = " << n << "\nheight = " << n << "\n";
  side << "row0 = iy 0 (y = 0)\n";
  side << "grid.length = " << num(snapshot.grid.length()) << "\n";
  side << "physics.m = " << num(snapshot.grid.mass()) << "\n";
  side << "time = " << num(snapshot.time / compton_period(snapshot.grid.mass())) << "\n";
  side << "phi_min = " << num(lo) << "\nphi_max = " << num(hi) << "\n";
  if (options.normalization == Normalization::Linear) {
    side << "normalization = linear\n";
    side << "mapping = gray = 255 (phi - phi_min) / (phi_max - phi_min); 128 when constant\n";
  } else {
    side << "normalization = arctan\n";
    side << "c = " << num(options.c) << "\n";
    side << "mapping = gray = 255 (atan(c phi) / pi + 1/2)\n";
  }
  if (!side) throw IoError("failed writing", path + ".map");
}

Graymap read_pgm(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open", path);
  std::string magic;
  int maxval = 0;
  Graymap g;
  is >> magic >> g.width >> g.height >> maxval;
  if (magic != "P5" || !is || maxval != 255 || g.width <= 0 || g.height <= 0) throw IoError("not an 8-bit PGM", path);
  is.get();
  g.pixels.resize(static_cast<std::size_t>(g.width) * g.height);
  if (!is.read(reinterpret_cast<char *>(g.pixels.data()), static_cast<std::streamsize>(g.pixels.size())))
    throw IoError("truncated PGM", path);
  return g;
}

void write_run(const RunOutput &out, const SimConfig &config) {
  std::filesystem::create_directories(config.output_dir);
  const std::filesystem::path dir(config.output_dir);
  {
    auto os = open_out((dir / "config.txt").string());
    os << echo_config(config);
  }
  write_trajectory((dir / "trajectory.txt").string(), out.trajectory, config);
  write_budgets((dir / "budgets.txt").string(), out.budgets, config);
}

}  // namespace pwsim::io
