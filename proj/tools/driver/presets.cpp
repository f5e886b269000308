#include "driver.hpp"
#include "ionloc/errors.hpp"

namespace ionloc::driver {

namespace {

json params(double epsilon, double delta) {
  return {{"h", 0.2}, {"epsilon", epsilon}, {"N", 2}, {"delta", delta}};
}

Preset make(std::string name, std::string description, std::string_view experiment,
            json p, json settings) {
  json doc = {{"label", name},
              {"description", description},
              {"experiment", experiment},
              {"params", std::move(p)},
              {"settings", std::move(settings)},
              {"output", "out/" + name}};
  return {std::move(name), std::move(description), std::move(doc)};
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      make("fig2", "chain matrix elements F_{m,m+2} and QE functions, eps=0.02, delta=0",
           "chain-spectrum", params(0.02, 0.0),
           {{"export_coupling", true}, {"profiles", {20, 60, 120, 200}}}),
      make("fig3", "characteristic delocalized chain function q=323, eps=0.02, delta=0",
           "chain-spectrum", params(0.02, 0.0), {{"profiles", {323}}, {"profile_widest", true}}),
      make("fig4a", "chain m_q versus Delta_q, eps=0.02, delta=0", "chain-spectrum",
           params(0.02, 0.0), json::object()),
      make("fig4b", "chain m_q versus Delta_q, eps=0.02, delta=0.001", "chain-spectrum",
           params(0.02, 0.001), json::object()),
      make("fig5a", "classical section, eps=0.02, delta=0", "classical-section",
           params(0.02, 0.0), json::object()),
      make("fig5b", "classical section, eps=0.02, delta=0.001", "classical-section",
           params(0.02, 0.001), json::object()),
      make("fig6", "classical section, eps=3, delta=0", "classical-section", params(3.0, 0.0),
           json::object()),
      make("fig7a", "time-averaged distribution, eps=0.02, tau 5000-105000", "time-average",
           params(0.02, 0.0), {{"warmup", 5000.0}, {"window_end", 105000.0}}),
      make("fig7b", "time-averaged distribution, eps=3, tau 500-10500", "time-average",
           params(3.0, 0.0), {{"warmup", 500.0}, {"window_end", 10500.0}}),
      make("fig8a", "Floquet m_q versus sigma_q, eps=3", "floquet-spectrum", params(3.0, 0.0),
           json::object()),
      make("fig8b", "characteristic chaotic Floquet state, eps=3", "floquet-spectrum",
           params(3.0, 0.0), {{"profile_widest", true}}),
  };
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (see list-presets)");
}

}  // namespace ionloc::driver
