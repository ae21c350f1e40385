// msforge: waveform design, gate simulation and sweep driver.

#include "msforge/config.hpp"
#include "msforge/errors.hpp"
#include "msforge/metrics.hpp"
#include "msforge/pulse_synth.hpp"
#include "msforge/units.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace msforge;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string preset;
  std::string engine;
  std::string out;
  std::string scheme = "robust";
  std::string waveform_path;
  int jobs = 0;
  int level = 0;
};

struct Context {
  RunConfig cfg;
  ModeSpectrum modes;
  fs::path out_dir;
  std::string command;

  fs::path file(const std::string& ext) const { return out_dir / (cfg.preset + "_" + command + "." + ext); }
};

Context make_context(const Options& o, const std::string& command) {
  std::optional<std::string> preset;
  if (!o.preset.empty()) preset = o.preset;
  std::optional<fs::path> file;
  if (!o.config_path.empty()) file = o.config_path;
  if (!preset && !file) preset = "paper-2ion";

  Context ctx;
  ctx.cfg = load_config(preset, file);
  if (!o.engine.empty()) ctx.cfg.simulation.engine = engine_from_string(o.engine);
  if (o.jobs > 0) ctx.cfg.jobs = o.jobs;
  if (o.level > 0) {
    if (o.level > 3) throw ConfigError("--level must be between 1 and 3");
    ctx.cfg.drive.gbc_level = o.level;
  }
  ctx.out_dir = ctx.cfg.output_dir;
  if (!o.out.empty()) ctx.out_dir = o.out;
  if (const char* env = std::getenv("MSFORGE_OUT"); env && *env) ctx.out_dir = env;
  ctx.command = command;
  ctx.modes = normal_modes(ctx.cfg.chain);

  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message());
  return ctx;
}

void save(const fs::path& path, const std::string& text) {
  write_text_file(path, text);
  std::cout << "wrote " << path.string() << "\n";
}

void save_json(const fs::path& path, const json& j) { save(path, j.dump(2) + "\n"); }

bool robust_scheme(const std::string& s) {
  if (s == "robust") return true;
  if (s == "nonrobust") return false;
  throw ConfigError("--scheme must be robust or nonrobust");
}

Waveform design_one(const Context& ctx, bool robust) {
  const DriveDesign& d = ctx.cfg.drive;
  const int n_seg = robust ? d.n_seg_robust : d.n_seg_nonrobust;
  const SynthesisProblem p = build_problem(ctx.modes, d.gate_time, d.drive_detuning, n_seg, robust, ctx.cfg.ions);
  return synthesize(p, d.angle).waveform;
}

int cmd_modes(const Options& o) {
  const Context ctx = make_context(o, "modes");
  const ModeSpectrum& m = ctx.modes;
  json j;
  j["ion_count"] = m.ion_count();
  j["axial_freq_rad_s"] = ctx.cfg.chain.ion_count > 1 ? axial_frequency(ctx.cfg.chain) : 0.0;
  auto modes = json::array();
  std::printf("%4s %18s %14s %10s  couplings\n", "mode", "freq_rad_s", "freq_MHz", "eta");
  for (int k = 0; k < m.mode_count(); ++k) {
    const double f = m.mode_freqs[static_cast<std::size_t>(k)];
    const double eta = m.lamb_dicke[static_cast<std::size_t>(k)];
    std::vector<double> b(static_cast<std::size_t>(m.ion_count()));
    for (int i = 0; i < m.ion_count(); ++i) b[static_cast<std::size_t>(i)] = m.couplings(i, k);
    std::printf("%4d %18.6f %14.9f %10.6f ", k, f, rad_to_hz(f) * 1e-6, eta);
    for (double v : b) std::printf(" %+.6f", v);
    std::printf("\n");
    modes.push_back({{"index", k}, {"freq_rad_s", f}, {"freq_hz", rad_to_hz(f)}, {"lamb_dicke", eta}, {"couplings", b}});
  }
  j["modes"] = modes;
  save_json(ctx.file("json"), j);
  return 0;
}

int cmd_synth(const Options& o) {
  const Context ctx = make_context(o, "synth");
  const bool robust = robust_scheme(o.scheme);
  const Waveform w = design_one(ctx, robust);
  const WaveformReport rep = validate_waveform(w, ctx.modes, ctx.cfg.ions);
  std::printf("segments %d  peak %.6e rad/s  theta %.15f\n", w.segment_count(), w.peak_rabi(), rep.theta);
  json j;
  j["scheme"] = o.scheme;
  j["waveform"] = to_json(w);
  j["validation"] = to_json(rep);
  save_json(ctx.file("json"), j);
  save(ctx.file("csv"), waveform_csv(w));
  return 0;
}

int cmd_validate(const Options& o) {
  const Context ctx = make_context(o, "validate");
  Waveform w;
  if (!o.waveform_path.empty()) {
    const json j = read_json_file(o.waveform_path);
    w = waveform_from_json(j.contains("waveform") ? j.at("waveform") : j);
  } else {
    w = design_one(ctx, robust_scheme(o.scheme));
  }
  const WaveformReport rep = validate_waveform(w, ctx.modes, ctx.cfg.ions);
  std::printf("theta %.15f  peak %.6e rad/s\n", rep.theta, rep.peak_rabi);
  for (std::size_t k = 0; k < rep.modes.size(); ++k) {
    const ModeResiduals& r = rep.modes[k];
    std::printf("mode %zu  |alpha(tau)| %.3e  |alpha_bar| %.3e  |beta(tau)| %.3e  |dalpha| %.3e\n", k, r.alpha_end,
                r.alpha_bar, r.beta_end, r.dalpha_end);
  }
  save_json(ctx.file("json"), to_json(rep));
  return 0;
}

int cmd_trajectory(const Options& o) {
  const Context ctx = make_context(o, "trajectory");
  const Waveform w = design_one(ctx, robust_scheme(o.scheme));
  NoiseParams noise = ctx.cfg.noise;
  noise.asym_shift = ctx.cfg.trajectory.asym_shift;
  const TrajectoryRecord rec = sample_trajectory(w, ctx.modes, noise, ctx.cfg.ions, ctx.cfg.trajectory.samples);
  save(ctx.file("csv"), trajectory_csv(rec, ctx.modes, noise));
  json j;
  j["scheme"] = o.scheme;
  j["asym_shift_rad_s"] = noise.asym_shift;
  auto closure = json::array();
  for (const ClosureMetrics& c : trajectory_closure(rec, ctx.modes, noise)) {
    closure.push_back({{"alpha_end", c.alpha_end},
                       {"alpha_diameter", c.alpha_diameter},
                       {"beta_end", c.beta_end},
                       {"beta_diameter", c.beta_diameter}});
  }
  j["closure"] = closure;
  save_json(ctx.file("json"), j);
  return 0;
}

SimulationSettings settings_of(const Context& ctx) { return ctx.cfg.simulation; }

int cmd_sweep(const Options& o, bool three_ion) {
  const Context ctx = make_context(o, three_ion ? "three-ion" : "sweep");
  const auto t0 = std::chrono::steady_clock::now();
  const SchemeSet set = design_schemes(ctx.modes, ctx.cfg.drive, ctx.cfg.ions);
  const auto grid = linear_grid(ctx.cfg.sweep.lo, ctx.cfg.sweep.hi, ctx.cfg.sweep.points);
  SweepResult r;
  if (three_ion) {
    r = three_ion_sweep(set, ctx.modes, grid, settings_of(ctx), ctx.cfg.jobs, ctx.cfg.sweep.fit_lo,
                        ctx.cfg.sweep.fit_hi);
  } else {
    r = sweep_asymmetric(set, ctx.modes, grid, settings_of(ctx), ctx.cfg.jobs, ctx.cfg.noise, ctx.cfg.sweep.fit_lo,
                         ctx.cfg.sweep.fit_hi);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("engine %s  points %zu  slope(dF) %.4f  slope(robust) %.4f  slope(gbc) %.4f  (%.1f s)\n",
              r.engine.c_str(), r.axis.size(), r.delta_fit.slope, r.robust_fit.slope, r.gbc_fit.slope, secs);
  save(ctx.file("csv"), sweep_csv(r));
  save_json(ctx.file("json"), to_json(r));
  return 0;
}

int cmd_contour(const Options& o) {
  const Context ctx = make_context(o, "contour");
  const ContourConfig& cc = ctx.cfg.contour;
  const SchemeSet set = design_schemes(ctx.modes, ctx.cfg.drive, ctx.cfg.ions);
  const ContourResult r = contour_grid(set, ctx.modes, linear_grid(cc.sym_lo, cc.sym_hi, cc.points),
                                       linear_grid(cc.asym_lo, cc.asym_hi, cc.points), settings_of(ctx), ctx.cfg.jobs);
  for (Scheme s : all_schemes) {
    const SchemeCrossings x = contour_crossings(r, s, cc.threshold, cc.radius);
    std::printf("%-9s  asym crossing %.2f rad/s  sym crossing %.2f rad/s  max within radius %.3e\n",
                to_string(s).c_str(), x.asymmetric, x.symmetric, x.max_within);
  }
  save(ctx.file("csv"), contour_csv(r));
  save_json(ctx.file("json"), to_json(r, cc.threshold, cc.radius));
  return 0;
}

int cmd_gbc(const Options& o) {
  const Context ctx = make_context(o, "gbc");
  const DriveDesign& d = ctx.cfg.drive;
  const GateCircuit c = gbc_recursive(d.angle, d.gbc_level, d.pi);
  const GbcDesign g{d.gate_time, d.angle, d.n_seg_robust, d.drive_detuning, d.reverse_drive_detuning};
  const WaveformBank bank = synthesize_bank(ctx.modes, g, c, ctx.cfg.ions);
  json j = to_json(c);
  json refs = json::object();
  for (const auto& [mult, sign] : c.piece_kinds()) {
    const CircuitElement e{CircuitElement::Kind::entangling, mult, sign, d.pi};
    refs[e.waveform_ref()] = to_json(bank.at(mult, sign));
  }
  j["waveforms"] = refs;
  std::printf("level %d  entangling pieces %d  total time %d tau\n", c.level, c.entangling_count(),
              c.total_time_multiplier());
  save_json(ctx.file("json"), j);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Molmer-Sorensen gate design and simulation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration file");
    sub->add_option("--preset", o.preset, "named preset (paper-2ion, paper-gbc, paper-3ion)");
    sub->add_option("--engine", o.engine, "magnus or exact");
    sub->add_option("--jobs", o.jobs, "worker threads for grid evaluation");
    sub->add_option("--out", o.out, "output directory (MSFORGE_OUT overrides)");
    sub->add_option("--level", o.level, "GBC recursion level (1-3)");
    sub->add_option("--scheme", o.scheme, "robust or nonrobust");
  };

  struct Sub {
    const char* name;
    const char* help;
    std::function<int()> run;
  };
  const std::vector<Sub> subs = {
      {"modes", "transverse mode table", [&] { return cmd_modes(o); }},
      {"synth", "synthesize a waveform", [&] { return cmd_synth(o); }},
      {"validate", "check closure and angle of a waveform", [&] { return cmd_validate(o); }},
      {"trajectory", "phase-space trajectories", [&] { return cmd_trajectory(o); }},
      {"sweep", "infidelity versus asymmetric shift", [&] { return cmd_sweep(o, false); }},
      {"contour", "infidelity over symmetric and asymmetric shifts", [&] { return cmd_contour(o); }},
      {"gbc", "compensation circuit and its waveforms", [&] { return cmd_gbc(o); }},
      {"three-ion", "asymmetric sweep on a three-ion chain", [&] { return cmd_sweep(o, true); }},
  };
  std::vector<CLI::App*> apps;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    if (std::string(s.name) == "validate") sub->add_option("--waveform", o.waveform_path, "waveform JSON to check");
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::config);
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (apps[i]->parsed()) return subs[i].run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io);
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config);
  }
  return static_cast<int>(ExitCode::config);
}
