#pragma once

#include "pwsim/diagnostics.hpp"
#include "pwsim/field.hpp"
#include "pwsim/simulation.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pwsim::io {

/// Whitespace-delimited trajectory: t x y g_x g_y gradphi_x gradphi_y phi.
/// Header lines start with '#' and carry units and grid metadata.
void write_trajectory(const std::string &path, std::span<const TrajectorySample> rows, const SimConfig &config);
std::vector<TrajectorySample> read_trajectory(const std::string &path);

/// t p_part_x p_part_y p_field_x p_field_y e_part e_field exchange lz.
void write_budgets(const std::string &path, std::span<const BudgetSample> rows, const SimConfig &config);
std::vector<BudgetSample> read_budgets(const std::string &path);

/// Ordered `key = value` report. Lines starting with '#' are comments.
class Report {
 public:
  void comment(const std::string &text);
  void set(const std::string &key, double value);
  void set(const std::string &key, const std::string &value);
  void set(const std::string &key, const Vec2 &value);

  std::string text() const;
  void write(const std::string &path) const;

 private:
  std::vector<std::pair<std::string, std::string>> lines_;  // empty key marks a comment
};

/// Parses a report into key -> value strings; throws IoError on malformed lines.
std::map<std::string, std::string> read_report(const std::string &path);
double report_number(const std::map<std::string, std::string> &report, const std::string &key);

/// PWS1 spectrogram: "PWS1", u32 version, u32 n_times, u32 n_freqs, f64
/// sample_dt, f64 window, f64 hop, f64 scale, then f64 times, f64
/// frequencies and the row-major [time][frequency] magnitude. Little-endian.
void write_spectrogram(const std::string &path, const diag::Spectrogram &s);
diag::Spectrogram read_spectrogram(const std::string &path);

enum class Normalization { Linear, Arctan };

struct HeatmapOptions {
  Normalization normalization = Normalization::Linear;
  double c = 50.0;  // arctan(c phi)
};

/// 8-bit binary PGM of phi, row iy = 0 first. A `<path>.map` sidecar records
/// the grey-level mapping and grid metadata.
void emit_heatmap(const FieldState &snapshot, const std::string &path, const HeatmapOptions &options = {});

struct Graymap {
  int width = 0, height = 0;
  std::vector<unsigned char> pixels;
};
Graymap read_pgm(const std::string &path);

/// Writes config.txt, trajectory.txt and budgets.txt into config.output_dir.
void write_run(const RunOutput &out, const SimConfig &config);

}  // namespace pwsim::io
