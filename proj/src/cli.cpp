#include "pwsim/cli.hpp"

#include "pwsim/config.hpp"
#include "pwsim/diagnostics.hpp"
#include "pwsim/error.hpp"
#include "pwsim/io.hpp"
#include "pwsim/simulation.hpp"
#include "pwsim/snapshot.hpp"
#include "pwsim/theory.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace pwsim::cli {
namespace {

std::string sci(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

SimConfig load_config(const Command &cmd, std::vector<std::string> overrides) {
  if (!cmd.out_dir.empty()) overrides.push_back("output.dir=" + cmd.out_dir);
  if (cmd.config_path.empty()) return parse_config_text("", overrides);
  return parse_config(cmd.config_path, overrides);
}

std::string drift_summary(const RunOutput &out) {
  std::string s;
  if (out.budgets.empty()) return s;
  const auto b = diag::budgets(out);
  try {
    const std::size_t i0 = b.index_at(out.ramp_end);
    if (b.p_total(i0).norm() > 0.0) s += ", momentum drift " + sci(diag::momentum_drift(b, out.ramp_end));
    const auto r = diag::energy_residual(b, out.ramp_end);
    double rmax = 0.0, xmax = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      rmax = std::max(rmax, std::abs(r[i]));
      xmax = std::max(xmax, std::abs(b.exchange[i0 + i] - b.exchange[i0]));
    }
    if (xmax > 0.0) s += ", energy residual/exchange " + sci(rmax / xmax);
  } catch (const std::out_of_range &) {
  }
  return s;
}

void write_final_snapshot(const RunOutput &out, const SimConfig &config) {
  write_snapshot((fs::path(config.output_dir) / "final.pwf").string(), out.final_field);
}

int do_run(const Command &cmd, std::ostream &out) {
  const SimConfig config = load_config(cmd, cmd.overrides);
  const RunOutput r = run(config);
  io::write_run(r, config);
  write_final_snapshot(r, config);
  out << "run: " << fixed(config.duration, 2) << " T_c in " << fixed(r.wall_seconds, 1) << " s, final speed "
      << fixed(velocity_of(r.final_particle.g).norm()) << " c" << drift_summary(r) << " -> " << config.output_dir
      << "\n";
  return 0;
}

int do_sweep(const Command &cmd, std::ostream &out, std::ostream &err) {
  std::vector<std::string> fixed_overrides;
  std::string key;
  std::vector<std::string> values;
  for (const auto &o : cmd.overrides) {
    const auto eq = o.find('=');
    if (eq != std::string::npos && o.find(',', eq) != std::string::npos) {
      if (!key.empty()) throw ConfigError("sweep accepts exactly one comma-separated --set axis");
      key = o.substr(0, eq);
      key.erase(key.find_last_not_of(" \t") + 1);
      std::stringstream ss(o.substr(eq + 1));
      for (std::string v; std::getline(ss, v, ',');) {
        v.erase(0, v.find_first_not_of(" \t"));
        v.erase(v.find_last_not_of(" \t") + 1);
        if (v.empty()) throw ConfigError("empty sweep value for " + key, key);
        values.push_back(v);
      }
    } else {
      fixed_overrides.push_back(o);
    }
  }
  if (key.empty()) throw ConfigError("sweep needs one --set key=v1,v2,... axis");
  const SimConfig base = load_config(cmd, fixed_overrides);
  {
    // Fail fast on a bad axis key or value before starting any run.
    SimConfig probe = base;
    for (const auto &v : values) {
      set_config_value(probe, key, v);
      probe.validate();
    }
  }

  const auto results = sweep(base, key, values);
  fs::create_directories(base.output_dir);
  std::ofstream index(fs::path(base.output_dir) / "sweep.txt");
  index << "# pwsim sweep over " << key << "\n# value status directory\n";
  int failures = 0;
  for (const auto &r : results) {
    SimConfig cfg = base;
    set_config_value(cfg, key, r.value);
    cfg.output_dir = (fs::path(base.output_dir) / (key + "=" + r.value)).string();
    if (r.output) {
      try {
        io::write_run(*r.output, cfg);
        write_final_snapshot(*r.output, cfg);
        index << r.value << " ok " << cfg.output_dir << "\n";
        continue;
      } catch (const std::exception &e) {
        err << "sweep " << key << "=" << r.value << ": " << e.what() << "\n";
      }
    } else {
      err << "sweep " << key << "=" << r.value << ": " << r.error << "\n";
    }
    ++failures;
    index << r.value << " failed " << cfg.output_dir << "\n";
  }
  out << "sweep: " << results.size() - failures << "/" << results.size() << " runs over " << key << " -> "
      << base.output_dir << "\n";
  return failures == 0 ? 0 : 1;
}

fs::path latest_snapshot(const fs::path &dir) {
  std::vector<fs::path> snaps;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.path().extension() == ".pwf") snaps.push_back(e.path());
  if (snaps.empty()) throw IoError("missing artifact: no field snapshot (*.pwf)", dir.string());
  std::sort(snaps.begin(), snaps.end());
  const auto final_it = std::find_if(snaps.begin(), snaps.end(), [](const fs::path &p) { return p.filename() == "final.pwf"; });
  return final_it != snaps.end() ? *final_it : snaps.back();
}

int do_analyze(const Command &cmd, std::ostream &out) {
  fs::path dir = cmd.out_dir;
  if (dir.empty()) {
    if (cmd.config_path.empty()) throw ConfigError("analyze needs --out DIR (a run directory) or --config");
    dir = parse_config(cmd.config_path, cmd.overrides).output_dir;
  }
  if (!fs::is_directory(dir)) throw IoError("missing artifact: run directory", dir.string());
  for (const char *name : {"config.txt", "trajectory.txt", "budgets.txt"})
    if (!fs::exists(dir / name)) throw IoError("missing artifact: " + std::string(name), (dir / name).string());
  const fs::path snap = latest_snapshot(dir);

  std::vector<std::string> overrides = cmd.overrides;
  overrides.push_back("output.dir=" + dir.string());
  const SimConfig config = parse_config((dir / "config.txt").string(), overrides);
  const auto traj = io::read_trajectory((dir / "trajectory.txt").string());
  const auto budg = io::read_budgets((dir / "budgets.txt").string());
  const auto a = diag::analyze_run(config, traj, budg);

  io::Report rep;
  rep.comment("pwsim analysis; frequencies in omega_c, lengths in lambda_c, momenta in natural units");
  rep.set("run_dir", dir.string());
  rep.set("ramp_end", ramp_end(config));
  rep.set("dominant_frequency", a.dominant_frequency);
  rep.set("amplitude", a.amplitude);
  rep.set("retention", a.retention);
  rep.set("final_speed", a.final_speed);
  rep.set("momentum_drift", a.momentum_drift);
  rep.set("energy_residual", a.energy_residual);
  rep.set("exchange_total", a.exchange_total);
  rep.set("lz_drift", a.lz_drift);
  rep.set("uncertainty_x", a.uncertainty.x);
  rep.set("uncertainty_y", a.uncertainty.y);
  rep.set("snapshot", snap.string());
  for (const auto &n : a.notes) rep.comment(n);
  rep.write((dir / "report.txt").string());
  if (a.spectrogram) io::write_spectrogram((dir / "spectrogram.pws").string(), *a.spectrogram);
  io::emit_heatmap(read_snapshot(snap.string()), (dir / "field.pgm").string());

  out << "analyze: dominant frequency " << fixed(a.dominant_frequency) << " omega_c, amplitude "
      << sci(a.amplitude) << " lambda_c, retention " << fixed(a.retention) << " -> " << (dir / "report.txt").string()
      << "\n";
  return 0;
}

int do_predict(const Command &cmd, std::ostream &out) {
  const double m = cmd.m.value_or(1.0);
  const double b = cmd.b.value_or(53.3);
  const double u = cmd.u.value_or(0.35);
  const double u0 = cmd.u0.value_or(u);
  const double v = cmd.v.value_or(1.0);
  if (!(m > 0.0)) throw ConfigError("--m must be positive", "m");
  if (!(b >= 0.0)) throw ConfigError("--b must be non-negative", "b");

  io::Report rep;
  try {
    const double gamma = theory::lorentz_gamma(u);
    rep.comment("pwsim predictions; natural units (c = hbar = 1), omega_c = m, lambda_c = 2 pi / m");
    rep.set("m", m);
    rep.set("b", b);
    rep.set("u", u);
    rep.set("gamma", gamma);
    rep.set("gamma_u", gamma * u);
    if (u == 0.0) {
      rep.set("lambda_dB", "inf");
      rep.set("lambda_dB_over_lambda_c", "inf");
    } else {
      rep.set("lambda_dB", theory::de_broglie_wavelength(gamma * u, m));
      rep.set("lambda_dB_over_lambda_c", 1.0 / (gamma * std::abs(u)));
    }
    rep.set("omega_zitter", theory::zitter_frequency(u, m));
    rep.set("omega_max", theory::max_frequency(u, m));
    const auto w = theory::wavefront(u0, v, compton_period(m));
    rep.comment("wavefront of a source at u0 expanding at v in its rest frame, one Compton period after emission");
    rep.set("u0", u0);
    rep.set("v", v);
    rep.set("wavefront_center", w.center);
    rep.set("wavefront_semi_inline", w.semi_inline);
    rep.set("wavefront_semi_transverse", w.semi_transverse);
    rep.set("wavefront_u_source", w.u_source);
    rep.set("wavefront_u_expansion", w.u_expansion);
    rep.set("delta_m_over_m", theory::virtual_mass(b));
    rep.set("m_eff", theory::effective_mass(b, m));
    rep.set("delta_m_over_m_grid", theory::virtual_mass_2d(b, m, default_source_variance(m)));
    try {
      const auto [e_b, n_b] = theory::interpolate_fit(b);
      rep.set("e_b", e_b);
      rep.set("n_b", n_b);
      rep.set("uncertainty_bound", theory::uncertainty_bound(b, gamma, e_b, n_b));
    } catch (const std::domain_error &e) {
      rep.set("uncertainty_bound", "n/a");
      rep.comment(e.what());
    }
  } catch (const std::domain_error &e) {
    throw ConfigError(e.what());
  }
  out << rep.text();
  if (!cmd.out_dir.empty()) {
    fs::create_directories(cmd.out_dir);
    rep.write((fs::path(cmd.out_dir) / "predict.txt").string());
  }
  return 0;
}

int do_relax(const Command &cmd, std::ostream &out) {
  const SimConfig config = load_config(cmd, cmd.overrides);
  const FieldState st = relax_static(config);
  fs::create_directories(config.output_dir);
  const fs::path dir(config.output_dir);
  write_snapshot((dir / "static.pwf").string(), st);
  io::emit_heatmap(st, (dir / "static.pgm").string());
  {
    std::ofstream os(dir / "config.txt");
    os << echo_config(config);
  }

  const double m = config.params.m, b = config.params.b, lc = compton_length(m);
  const Vec2 c = config.grid.center();
  io::Report rep;
  rep.comment("relaxed static field along +x from the particle; r in lambda_c");
  rep.comment("columns: phi (relaxed), smoothed-source profile, point-source profile b K0(m r) / (2 pi m)");
  double worst = 0.0;
  for (double r : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    const double x = r * lc;
    if (x >= 0.5 * config.grid.side()) continue;
    const double phi = sample_value(st, c + Vec2{x, 0.0});
    const double smooth = theory::smoothed_static_profile_2d(x, b, m, config.source_variance);
    const double point = theory::static_profile_2d(x, b, m);
    if (r >= 1.0) worst = std::max(worst, std::abs(phi / point - 1.0));
    char key[32];
    std::snprintf(key, sizeof key, "profile_r%.1f", r);
    rep.set(key, std::to_string(phi) + " " + std::to_string(smooth) + " " + std::to_string(point));
  }
  rep.set("max_rel_error_vs_point_1_to_3", worst);
  rep.write((dir / "relax.txt").string());
  out << "relax: static field written to " << (dir / "static.pwf").string() << ", max deviation from point profile "
      << sci(worst) << " on [1, 3] lambda_c\n";
  return 0;
}

}  // namespace

std::optional<Command> parse_command(int argc, const char *const *argv, std::ostream &out) {
  CLI::App app{"pwsim: coupled particle and Klein-Gordon field simulator"};
  app.require_subcommand(1);
  Command cmd;

  auto common = [&](CLI::App *sub, bool with_set) {
    sub->add_option("--config", cmd.config_path, "config file")->check(CLI::ExistingFile);
    sub->add_option("--out", cmd.out_dir, "output directory");
    if (with_set) sub->add_option("--set", cmd.overrides, "key=value override (repeatable)");
  };
  auto *run_cmd = app.add_subcommand("run", "run one simulation");
  common(run_cmd, true);
  auto *sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep; one --set takes a comma-separated list");
  common(sweep_cmd, true);
  auto *analyze_cmd = app.add_subcommand("analyze", "analyze a run directory (--out DIR)");
  common(analyze_cmd, true);
  auto *predict_cmd = app.add_subcommand("predict", "closed-form predictions");
  common(predict_cmd, false);
  predict_cmd->add_option("--b", cmd.b, "coupling");
  predict_cmd->add_option("--u", cmd.u, "particle speed");
  predict_cmd->add_option("--u0", cmd.u0, "source speed for the wavefront");
  predict_cmd->add_option("--v", cmd.v, "rest-frame expansion speed");
  predict_cmd->add_option("--m", cmd.m, "mass");
  auto *relax_cmd = app.add_subcommand("relax", "relax the static field of a particle at rest");
  common(relax_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError &e) {
    throw ConfigError(e.what());
  }
  if (run_cmd->parsed()) cmd.sub = Subcommand::Run;
  else if (sweep_cmd->parsed()) cmd.sub = Subcommand::Sweep;
  else if (analyze_cmd->parsed()) cmd.sub = Subcommand::Analyze;
  else if (predict_cmd->parsed()) cmd.sub = Subcommand::Predict;
  else cmd.sub = Subcommand::Relax;
  for (const auto &o : cmd.overrides)
    if (o.find('=') == std::string::npos) throw ConfigError("--set expects key=value (got '" + o + "')");
  return cmd;
}

int run_command(const Command &cmd, std::ostream &out, std::ostream &err) {
  try {
    switch (cmd.sub) {
      case Subcommand::Run: return do_run(cmd, out);
      case Subcommand::Sweep: return do_sweep(cmd, out, err);
      case Subcommand::Analyze: return do_analyze(cmd, out);
      case Subcommand::Predict: return do_predict(cmd, out);
      case Subcommand::Relax: return do_relax(cmd, out);
    }
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  std::optional<Command> cmd;
  try {
    cmd = parse_command(argc, argv, out);
  } catch (const ConfigError &e) {
    err << "usage error: " << e.what() << "\nrun with --help for usage\n";
    return 2;
  }
  if (!cmd) return 0;
  return run_command(*cmd, out, err);
}

}  // namespace pwsim::cli
