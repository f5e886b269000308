#include <array>
#include <fstream>
#include <sstream>
#include <utility>

#include "driver.hpp"
#include "ionloc/errors.hpp"

namespace ionloc::driver {

namespace {

constexpr std::array<std::pair<Experiment, std::string_view>, 7> kNames{{
    {Experiment::cells, "cells"},
    {Experiment::chain_spectrum, "chain-spectrum"},
    {Experiment::floquet_spectrum, "floquet-spectrum"},
    {Experiment::lattice2d, "lattice2d"},
    {Experiment::evolve, "evolve"},
    {Experiment::time_average, "time-average"},
    {Experiment::classical_section, "classical-section"},
}};

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

// Same JSON kind, with integers accepted where a float is expected.
bool compatible(const json& def, const json& v) {
  if (def.is_number_float()) return v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    for (const auto& x : v) {
      if (!x.is_number_integer()) return false;
    }
    return true;
  }
  return def.type() == v.type();
}

}  // namespace

std::string_view experiment_name(Experiment e) {
  for (const auto& [k, n] : kNames) {
    if (k == e) return n;
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  std::string msg = "unknown experiment '" + std::string(name) + "'; expected one of";
  for (const auto& [k, n] : kNames) msg += " " + std::string(n);
  throw ConfigError(msg);
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (const auto& [k, n] : kNames) v.push_back(k);
    return v;
  }();
  return all;
}

json default_settings(Experiment e) {
  switch (e) {
    case Experiment::cells:
      return {{"m_ceiling", 1200.0}};
    case Experiment::chain_spectrum:
      // profiles: indices q in the m_q-sorted list; profile_widest adds the
      // state of largest Delta_q with m_q below m_window.
      return {{"m_offset", 0},          {"sites", 600},
              {"m_window", 800.0},      {"profiles", json::array()},
              {"profile_widest", false}, {"export_coupling", false}};
    case Experiment::floquet_spectrum:
      // basis_size 0 picks ceil(1.5 m_c) for the last of analysed_cells.
      return {{"basis_size", 0},        {"analysed_cells", 3},
              {"tolerance", 1e-10},     {"m_window", 0.0},
              {"profiles", json::array()}, {"profile_widest", false}};
    case Experiment::lattice2d:
      return {{"basis_size", 20}, {"l_max", 40}};
    case Experiment::evolve:
      return {{"basis_size", 0},   {"analysed_cells", 2}, {"m0", 30},
              {"tau_end", 500.0},  {"samples", 101},      {"tolerance", 1e-10},
              {"tail_fraction", 0.9}, {"tail_tolerance", 1e-6}};
    case Experiment::time_average:
      return {{"basis_size", 0},      {"analysed_cells", 3}, {"m0", 30},
              {"warmup", 500.0},      {"window_end", 10500.0}, {"samples", 100},
              {"tolerance", 1e-10},   {"tail_fraction", 0.9}, {"tail_tolerance", 1e-6}};
    case Experiment::classical_section:
      return {{"cells", 7},      {"per_cell", 20},      {"angles", 8},
              {"periods", 500},  {"tolerance", 1e-11}};
  }
  return json::object();
}

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, {"experiment", "params", "settings", "output", "label", "description"},
                 "config");
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
    throw ConfigError("config needs a string 'experiment'");
  }
  ExperimentConfig c;
  c.experiment = parse_experiment(doc["experiment"].get<std::string>());

  if (doc.contains("params")) {
    const json& p = doc["params"];
    reject_unknown(p, {"h", "epsilon", "N", "delta"}, "params");
    auto num = [&](const char* key, double fallback) {
      if (!p.contains(key)) return fallback;
      if (!p[key].is_number()) throw ConfigError(std::string("params.") + key + " must be a number");
      return p[key].get<double>();
    };
    c.params.h = num("h", c.params.h);
    c.params.epsilon = num("epsilon", c.params.epsilon);
    c.params.detuning = num("delta", c.params.detuning);
    if (p.contains("N")) {
      if (!p["N"].is_number_integer()) throw ConfigError("params.N must be an integer");
      c.params.resonance = p["N"].get<int>();
    }
  }
  c.params.validate();

  c.settings = default_settings(c.experiment);
  if (doc.contains("settings")) {
    const json& s = doc["settings"];
    if (!s.is_object()) throw ConfigError("settings must be an object");
    for (const auto& [key, value] : s.items()) {
      if (!c.settings.contains(key)) {
        throw ConfigError("unknown setting '" + key + "' for experiment " +
                          std::string(experiment_name(c.experiment)));
      }
      if (!compatible(c.settings[key], value)) {
        throw ConfigError("setting '" + key + "' has the wrong type");
      }
      c.settings[key] = value;
    }
  }
  for (auto key : {"output", "label", "description"}) {
    if (doc.contains(key) && !doc[key].is_string()) {
      throw ConfigError(std::string(key) + " must be a string");
    }
  }
  if (doc.contains("output")) c.output = doc["output"].get<std::string>();
  if (doc.contains("label")) c.label = doc["label"].get<std::string>();
  if (doc.contains("description")) c.description = doc["description"].get<std::string>();
  if (c.output.empty()) throw ConfigError("output directory must not be empty");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  return {{"label", c.label},
          {"description", c.description},
          {"experiment", experiment_name(c.experiment)},
          {"params",
           {{"h", c.params.h},
            {"epsilon", c.params.epsilon},
            {"N", c.params.resonance},
            {"delta", c.params.detuning}}},
          {"settings", c.settings},
          {"output", c.output}};
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::stringstream parts(path);
  std::string part;
  std::vector<std::string> keys;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw ConfigError("override key '" + path + "' has an empty component");
    keys.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override key '" + path + "' crosses a value");
    node = &(*node)[keys[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override key '" + path + "' crosses a value");
  (*node)[keys.back()] = value;
}

}  // namespace ionloc::driver
