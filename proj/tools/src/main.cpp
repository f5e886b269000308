#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driver.hpp"
#include "ionloc/errors.hpp"
#include "ionloc/parallel.hpp"

using namespace ionloc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitGate = 4;

int execute(driver::json doc, const std::string& out, const std::vector<std::string>& sets) {
  for (const auto& s : sets) driver::apply_override(doc, s);
  if (!out.empty()) doc["output"] = out;
  const auto config = driver::parse_config(doc);
  std::cerr << "ionloc: " << config.label << " (" << driver::experiment_name(config.experiment)
            << ") " << config.params << " -> " << config.output << "\n";
  const auto result = driver::run(config);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : result.files) std::cout << config.output << "/" << f.name << " " << f.rows << "\n";
  std::cout << config.output << "/" << driver::kManifestName << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven trapped-ion oscillator: Floquet, resonance-chain and classical experiments"};
  app.require_subcommand(0, 1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: IONLOC_THREADS or all cores)");

  std::string config_path, out, preset_name;
  std::vector<std::string> sets;

  auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_option("--set", sets, "override a config value, e.g. --set settings.m0=40");

  auto* preset = app.add_subcommand("preset", "run a named preset (see list-presets)");
  preset->add_option("name", preset_name, "preset name")->required();
  preset->add_option("--out", out, "output directory (default out/<name>)");
  preset->add_option("--set", sets, "override a preset value");

  auto* list = app.add_subcommand("list-presets", "print the preset catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  apply_thread_env();
  if (threads > 0) set_thread_count(threads);

  try {
    if (*list) {
      for (const auto& p : driver::presets()) {
        const auto c = driver::parse_config(p.document);
        std::cout << p.name << "\t" << driver::experiment_name(c.experiment) << "\t" << c.params
                  << "\t" << p.description << "\n";
      }
      return 0;
    }
    if (*run) {
      const auto base = driver::load_config(config_path);
      return execute(driver::to_json(base), out, sets);
    }
    if (*preset) return execute(driver::find_preset(preset_name).document, out, sets);
    std::cerr << app.help();
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const GateError& e) {
    std::cerr << "convergence gate failed: " << e.what() << "\n";
    return kExitGate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
