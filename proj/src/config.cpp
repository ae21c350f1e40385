#include "msforge/config.hpp"

#include "msforge/errors.hpp"
#include "msforge/units.hpp"

#include <fstream>
#include <map>
#include <set>

namespace msforge {

namespace {

using nlohmann::json;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"chain", {"ions", "mass_amu", "radial_freq", "axial_freq", "spacing_um", "wavelength_nm", "eta_override"}},
      {"drive",
       {"gate_time_us", "drive_detuning", "reverse_drive_detuning", "angle", "n_seg", "n_seg_nonrobust", "robust",
        "ions"}},
      {"noise", {"sym_shift", "asym_shift", "spin_phase", "motional_phase"}},
      {"simulation",
       {"engine", "fock_cutoff", "dt_max_s", "tolerance", "max_halvings", "stepper", "pi_kind", "pi_rabi",
        "gbc_level", "jobs"}},
      {"sweep", {"asym_min", "asym_max", "points", "fit_min", "fit_max"}},
      {"contour", {"sym_min", "sym_max", "asym_min", "asym_max", "points", "threshold", "radius"}},
      {"trajectory", {"asym_shift", "samples"}},
      {"output", {"dir"}},
  };
  return s;
}

json base_preset() {
  return json::parse(R"({
    "chain": {"ions": 2, "mass_amu": 39.962590863, "radial_freq": "1.59 MHz", "spacing_um": 8.0,
              "wavelength_nm": 729.0, "eta_override": 0.1},
    "drive": {"gate_time_us": 150.0, "drive_detuning": "9.470 Mrad/s", "reverse_drive_detuning": "10.190 Mrad/s",
              "angle": 0.78539816339744831, "n_seg": 16, "n_seg_nonrobust": 15, "robust": true, "ions": [0, 1]},
    "noise": {"sym_shift": "0 rad/s", "asym_shift": "0 rad/s"},
    "simulation": {"engine": "magnus", "fock_cutoff": 10, "stepper": "segment", "pi_kind": "ideal",
                   "pi_rabi": "1 MHz", "gbc_level": 1, "jobs": 1},
    "sweep": {"asym_min": "-1000 rad/s", "asym_max": "1000 rad/s", "points": 41,
              "fit_min": "100 rad/s", "fit_max": "1000 rad/s"},
    "contour": {"sym_min": "-1000 rad/s", "sym_max": "1000 rad/s", "asym_min": "-1000 rad/s",
                "asym_max": "1000 rad/s", "points": 21, "threshold": 1e-4, "radius": "500 rad/s"},
    "trajectory": {"asym_shift": "1 kHz", "samples": 501},
    "output": {"dir": "out"}
  })");
}

const json& get_block(const json& j, const char* name) {
  static const json empty = json::object();
  return j.contains(name) ? j.at(name) : empty;
}

template <class T>
std::optional<T> opt(const json& block, const char* key, const std::string& path) {
  if (!block.contains(key) || block.at(key).is_null()) return std::nullopt;
  try {
    return block.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + path + "." + key + "' has the wrong type");
  }
}

std::optional<double> freq(const json& block, const char* key, const std::string& path) {
  if (!block.contains(key) || block.at(key).is_null()) return std::nullopt;
  if (!block.at(key).is_string()) {
    throw ConfigError("config key '" + path + "." + key + "' must be a string with a unit suffix");
  }
  try {
    return parse_frequency(block.at(key).get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + path + "." + key + "': " + e.what());
  }
}

void check_keys(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") continue;
    const auto it = schema().find(key);
    if (it == schema().end()) throw ConfigError("unknown config key '" + key + "'");
    if (!value.is_object()) throw ConfigError("config block '" + key + "' must be an object");
    for (const auto& [sub, v] : value.items()) {
      (void)v;
      if (!it->second.count(sub)) throw ConfigError("unknown config key '" + key + "." + sub + "'");
    }
  }
}

} // namespace

std::vector<std::string> preset_names() { return {"paper-2ion", "paper-gbc", "paper-3ion"}; }

json preset_json(const std::string& name) {
  json j = base_preset();
  if (name == "paper-2ion") {
    j["preset"] = name;
    return j;
  }
  if (name == "paper-gbc") {
    j["preset"] = name;
    j["simulation"]["gbc_level"] = 1;
    return j;
  }
  if (name == "paper-3ion") {
    j["preset"] = name;
    j["chain"] = json::parse(R"({"ions": 3, "mass_amu": 39.962590863, "radial_freq": "1.59 MHz",
                                "axial_freq": "586.516 kHz", "wavelength_nm": 729.0, "eta_override": 0.1})");
    j["drive"]["n_seg"] = 20;
    j["drive"]["n_seg_nonrobust"] = 15;
    j["simulation"]["engine"] = "exact";
    j["simulation"]["fock_cutoff"] = 8;
    j["sweep"] = json::parse(R"({"asym_min": "-1 kHz", "asym_max": "1 kHz", "points": 41,
                                "fit_min": "100 rad/s", "fit_max": "1 kHz"})");
    return j;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig parse_config(const json& j) {
  check_keys(j);
  RunConfig c;
  c.merged = j;
  if (j.contains("preset")) c.preset = j.at("preset").get<std::string>();

  const json& ch = get_block(j, "chain");
  c.chain.ion_count = opt<int>(ch, "ions", "chain").value_or(2);
  c.chain.ion_mass = opt<double>(ch, "mass_amu", "chain").value_or(constants::calcium40_mass_amu) *
                     constants::atomic_mass_unit;
  c.chain.radial_freq = freq(ch, "radial_freq", "chain").value_or(0.0);
  c.chain.axial_freq = freq(ch, "axial_freq", "chain");
  if (const auto d = opt<double>(ch, "spacing_um", "chain")) c.chain.two_ion_spacing = *d * 1e-6;
  const double lambda_nm = opt<double>(ch, "wavelength_nm", "chain").value_or(729.0);
  if (!(lambda_nm > 0.0)) throw ConfigError("config key 'chain.wavelength_nm' must be positive");
  c.chain.laser_wavevector = two_pi / (lambda_nm * 1e-9);
  c.chain.eta_override = opt<double>(ch, "eta_override", "chain");
  validate(c.chain);

  const json& dr = get_block(j, "drive");
  c.drive.gate_time = opt<double>(dr, "gate_time_us", "drive").value_or(150.0) * 1e-6;
  c.drive.drive_detuning = freq(dr, "drive_detuning", "drive").value_or(0.0);
  c.drive.reverse_drive_detuning = freq(dr, "reverse_drive_detuning", "drive").value_or(c.drive.drive_detuning);
  c.drive.angle = opt<double>(dr, "angle", "drive").value_or(std::numbers::pi / 4);
  c.drive.n_seg_robust = opt<int>(dr, "n_seg", "drive").value_or(16);
  c.drive.n_seg_nonrobust = opt<int>(dr, "n_seg_nonrobust", "drive").value_or(15);
  c.robust = opt<bool>(dr, "robust", "drive").value_or(true);
  if (const auto ions = opt<std::vector<int>>(dr, "ions", "drive")) {
    if (ions->size() != 2) throw ConfigError("config key 'drive.ions' must list exactly two ions");
    c.ions = {(*ions)[0], (*ions)[1]};
  }
  // A single ion has no pair; commands that drive one fail later in synthesis.
  if (c.chain.ion_count > 1 &&
      (c.ions.first < 0 || c.ions.second < 0 || c.ions.first >= c.chain.ion_count ||
       c.ions.second >= c.chain.ion_count || c.ions.first == c.ions.second)) {
    throw ConfigError("config key 'drive.ions' must name two distinct ions of the chain");
  }
  if (!(c.drive.gate_time > 0.0)) throw ConfigError("config key 'drive.gate_time_us' must be positive");

  const json& no = get_block(j, "noise");
  c.noise.sym_shift = freq(no, "sym_shift", "noise").value_or(0.0);
  c.noise.asym_shift = freq(no, "asym_shift", "noise").value_or(0.0);
  c.noise.spin_phase = opt<double>(no, "spin_phase", "noise").value_or(std::numbers::pi / 2);
  c.noise.motional_phase = opt<double>(no, "motional_phase", "noise").value_or(std::numbers::pi);

  const json& si = get_block(j, "simulation");
  c.simulation.engine = engine_from_string(opt<std::string>(si, "engine", "simulation").value_or("magnus"));
  c.simulation.fock_cutoff = opt<int>(si, "fock_cutoff", "simulation").value_or(10);
  if (c.simulation.fock_cutoff < 2) throw ConfigError("config key 'simulation.fock_cutoff' must be at least 2");
  c.simulation.exact.dt_max = opt<double>(si, "dt_max_s", "simulation").value_or(0.0);
  c.simulation.exact.tolerance = opt<double>(si, "tolerance", "simulation").value_or(1e-8);
  c.simulation.exact.max_halvings = opt<int>(si, "max_halvings", "simulation").value_or(6);
  const std::string stepper = opt<std::string>(si, "stepper", "simulation").value_or("segment");
  if (stepper == "midpoint") {
    c.simulation.exact.stepper = Stepper::midpoint;
  } else if (stepper == "segment") {
    c.simulation.exact.stepper = Stepper::segment;
  } else {
    throw ConfigError("config key 'simulation.stepper' must be midpoint or segment");
  }
  c.drive.pi = pi_kind_from_string(opt<std::string>(si, "pi_kind", "simulation").value_or("ideal"));
  c.simulation.pi_rabi = freq(si, "pi_rabi", "simulation").value_or(two_pi * 1e6);
  c.drive.gbc_level = opt<int>(si, "gbc_level", "simulation").value_or(1);
  if (c.drive.gbc_level < 1 || c.drive.gbc_level > 3) {
    throw ConfigError("config key 'simulation.gbc_level' must be between 1 and 3");
  }
  c.jobs = opt<int>(si, "jobs", "simulation").value_or(1);

  const json& sw = get_block(j, "sweep");
  c.sweep.lo = freq(sw, "asym_min", "sweep").value_or(c.sweep.lo);
  c.sweep.hi = freq(sw, "asym_max", "sweep").value_or(c.sweep.hi);
  c.sweep.points = opt<int>(sw, "points", "sweep").value_or(c.sweep.points);
  c.sweep.fit_lo = freq(sw, "fit_min", "sweep").value_or(c.sweep.fit_lo);
  c.sweep.fit_hi = freq(sw, "fit_max", "sweep").value_or(c.sweep.fit_hi);

  const json& co = get_block(j, "contour");
  c.contour.sym_lo = freq(co, "sym_min", "contour").value_or(c.contour.sym_lo);
  c.contour.sym_hi = freq(co, "sym_max", "contour").value_or(c.contour.sym_hi);
  c.contour.asym_lo = freq(co, "asym_min", "contour").value_or(c.contour.asym_lo);
  c.contour.asym_hi = freq(co, "asym_max", "contour").value_or(c.contour.asym_hi);
  c.contour.points = opt<int>(co, "points", "contour").value_or(c.contour.points);
  c.contour.threshold = opt<double>(co, "threshold", "contour").value_or(c.contour.threshold);
  c.contour.radius = freq(co, "radius", "contour").value_or(c.contour.radius);

  const json& tr = get_block(j, "trajectory");
  c.trajectory.asym_shift = freq(tr, "asym_shift", "trajectory").value_or(0.0);
  c.trajectory.samples = opt<int>(tr, "samples", "trajectory").value_or(501);

  c.output_dir = opt<std::string>(get_block(j, "output"), "dir", "output").value_or("out");
  if (c.sweep.points < 2 || c.contour.points < 2) throw ConfigError("grids need at least two points");
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

RunConfig load_config(const std::optional<std::string>& preset, const std::optional<std::filesystem::path>& file) {
  json user = file ? read_json_file(*file) : json::object();
  if (!user.is_object()) throw ConfigError("configuration must be a JSON object");
  std::optional<std::string> name = preset;
  if (!name && user.contains("preset")) name = user.at("preset").get<std::string>();
  json merged = name ? preset_json(*name) : json::object();
  check_keys(user);
  merged.merge_patch(user);
  if (name) merged["preset"] = *name;
  return parse_config(merged);
}

} // namespace msforge
