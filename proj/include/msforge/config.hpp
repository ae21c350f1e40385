#pragma once

#include "msforge/chain_model.hpp"
#include "msforge/circuits.hpp"
#include "msforge/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace msforge {

struct SweepConfig {
  double lo = -1000.0; // rad/s
  double hi = 1000.0;
  int points = 41;
  double fit_lo = 100.0;
  double fit_hi = 1000.0;
};

struct ContourConfig {
  double sym_lo = -1000.0;
  double sym_hi = 1000.0;
  double asym_lo = -1000.0;
  double asym_hi = 1000.0;
  int points = 21;
  double threshold = 1e-4;
  double radius = 500.0;
};

struct TrajectoryConfig {
  double asym_shift = 0.0; // rad/s
  int samples = 501;
};

struct RunConfig {
  std::string preset = "custom";
  ChainSpec chain;
  DriveDesign drive;
  bool robust = true;
  IonPair ions;
  NoiseParams noise;
  SimulationSettings simulation;
  SweepConfig sweep;
  ContourConfig contour;
  TrajectoryConfig trajectory;
  std::string output_dir = "out";
  int jobs = 1;
  nlohmann::json merged; // effective configuration after preset merge
};

std::vector<std::string> preset_names();
/// Raw JSON of a named preset; ConfigError for an unknown name.
nlohmann::json preset_json(const std::string& name);

/// Validates keys and converts units. ConfigError names the offending key.
RunConfig parse_config(const nlohmann::json& j);

/// Preset (if any) merged with the config file (if any), file values winning.
RunConfig load_config(const std::optional<std::string>& preset, const std::optional<std::filesystem::path>& file);

nlohmann::json read_json_file(const std::filesystem::path& path);

} // namespace msforge
