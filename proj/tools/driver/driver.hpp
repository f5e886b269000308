#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ionloc/model.hpp"

namespace ionloc::driver {

using nlohmann::json;

enum class Experiment {
  cells,
  chain_spectrum,
  floquet_spectrum,
  lattice2d,
  evolve,
  time_average,
  classical_section,
};

std::string_view experiment_name(Experiment e);
Experiment parse_experiment(std::string_view name);  // throws ConfigError
const std::vector<Experiment>& all_experiments();

/// Settings accepted by an experiment, with their default values. Keys not
/// listed here are rejected.
json default_settings(Experiment e);

struct ExperimentConfig {
  std::string label = "custom";  // preset name for presets
  std::string description;
  Experiment experiment = Experiment::cells;
  ModelParams params;
  json settings;  // defaults merged with user values
  std::string output = "out";
};

/// Parses and validates a config document:
///   {"experiment": ..., "params": {"h", "epsilon", "N", "delta"},
///    "settings": {...}, "output": ..., "label": ..., "description": ...}
/// Unknown keys and wrong value types raise ConfigError.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);

/// Serialized form of a config; parse_config(to_json(c)) reproduces c.
json to_json(const ExperimentConfig& config);

/// Applies "a.b.c=value" to a config document. The value is read as JSON
/// when it parses, else as a string.
void apply_override(json& doc, std::string_view assignment);

struct Preset {
  std::string name;
  std::string description;
  json document;
};

/// One preset per paper figure panel.
const std::vector<Preset>& presets();
const Preset& find_preset(std::string_view name);  // throws ConfigError

struct OutputFile {
  std::string name;
  long rows = 0;
};

struct RunResult {
  std::vector<OutputFile> files;
  json diagnostics = json::object();
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

/// Runs the experiment, writes its CSV files into config.output and then the
/// manifest (manifest.json, written last via rename). The output directory
/// must be absent, empty, or hold only a previous run's listed files.
RunResult run(const ExperimentConfig& config);

inline constexpr const char* kManifestName = "manifest.json";

}  // namespace ionloc::driver
