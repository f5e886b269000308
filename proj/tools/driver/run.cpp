#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "driver.hpp"
#include "ionloc/classical.hpp"
#include "ionloc/csv.hpp"
#include "ionloc/errors.hpp"
#include "ionloc/floquet.hpp"
#include "ionloc/resonance_chain.hpp"
#include "ionloc/specfun.hpp"

#ifndef IONLOC_VERSION
#define IONLOC_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace ionloc::driver {

namespace {

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {}

  std::string path(const std::string& name) {
    touched_.push_back(dir_ / name);
    return touched_.back().string();
  }

  // Removes everything this run opened; used when the run fails.
  void discard() {
    std::error_code ec;
    for (const auto& p : touched_) fs::remove(p, ec);
  }

  void add(CsvWriter& w) {
    w.close();
    files_.push_back({fs::path(w.path()).filename().string(), w.rows()});
  }

  std::vector<OutputFile>& files() { return files_; }

 private:
  fs::path dir_;
  std::vector<OutputFile> files_;
  std::vector<fs::path> touched_;
};

// Creates the directory, or clears the files listed by a previous manifest.
// Anything else in the directory is left alone and refused.
void prepare_output_dir(const fs::path& dir) {
  if (!fs::exists(dir)) {
    fs::create_directories(dir);
    return;
  }
  if (!fs::is_directory(dir)) throw ConfigError("output path " + dir.string() + " is not a directory");
  std::set<std::string> owned{kManifestName, std::string(kManifestName) + ".tmp"};
  const fs::path manifest = dir / kManifestName;
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    try {
      const json old = json::parse(in);
      for (const auto& f : old.at("files")) owned.insert(f.at("name").get<std::string>());
    } catch (const json::exception&) {
      throw ConfigError("output directory holds an unreadable manifest: " + manifest.string());
    }
  }
  std::vector<fs::path> stale;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!owned.count(name) || !entry.is_regular_file()) {
      throw ConfigError("output directory " + dir.string() + " holds '" + name +
                        "', which no previous run wrote; use an empty directory");
    }
    stale.push_back(entry.path());
  }
  for (const auto& p : stale) fs::remove(p);
}

json stats_json(const IntegratorStats& s) {
  return {{"accepted_steps", s.accepted_steps},
          {"rejected_steps", s.rejected_steps},
          {"rhs_evaluations", s.rhs_evaluations},
          {"min_step", s.min_step},
          {"max_step", s.max_step}};
}

std::string_view residency_name(Residency r) {
  switch (r) {
    case Residency::resident: return "resident";
    case Residency::delocalized: return "delocalized";
    default: return "unresolved";
  }
}

std::vector<int> int_list(const json& settings, const char* key) {
  return settings.at(key).get<std::vector<int>>();
}

int positive(const json& settings, const char* key) {
  const int v = settings.at(key).get<int>();
  if (v < 1) throw ConfigError(std::string(key) + " must be >= 1");
  return v;
}

void write_profile(OutputDir& out, const std::string& name, const std::vector<long>& sites,
                   const QuasienergyState& st) {
  CsvWriter w(out.path(name), {"m", "re", "im", "probability"});
  for (std::size_t k = 0; k < sites.size(); ++k) {
    w.field(sites[k]).field(st.amplitudes[k].real()).field(st.amplitudes[k].imag());
    w.field(std::norm(st.amplitudes[k]));
    w.end_row();
  }
  out.add(w);
}

void write_states(OutputDir& out, const std::string& name, std::string_view energy_column,
                  const std::vector<QuasienergyState>& states) {
  CsvWriter w(out.path(name), {"q", energy_column, "m_q", "delta_q", "cell", "residency"});
  for (std::size_t q = 0; q < states.size(); ++q) {
    const auto& st = states[q];
    w.field(static_cast<long>(q)).field(st.quasienergy).field(st.mean).field(st.spread);
    w.field(st.cell).field(residency_name(st.residency));
    w.end_row();
  }
  out.add(w);
}

// Index of the state with the largest spread among m_q < m_window, or -1.
int widest_below(const std::vector<QuasienergyState>& states, double m_window) {
  int best = -1;
  for (std::size_t q = 0; q < states.size(); ++q) {
    if (states[q].mean >= m_window) continue;
    if (best < 0 || states[q].spread > states[best].spread) best = static_cast<int>(q);
  }
  return best;
}

void export_profiles(OutputDir& out, const std::string& prefix, const json& settings,
                     const std::vector<long>& sites, const std::vector<QuasienergyState>& states,
                     double m_window, json& diag) {
  for (int q : int_list(settings, "profiles")) {
    if (q < 0 || q >= static_cast<int>(states.size())) {
      throw ConfigError("profile index " + std::to_string(q) + " outside 0.." +
                        std::to_string(states.size() - 1));
    }
    write_profile(out, prefix + "_profile_q" + std::to_string(q) + ".csv", sites, states[q]);
  }
  if (settings.at("profile_widest").get<bool>()) {
    const int q = widest_below(states, m_window);
    if (q < 0) throw ConfigError("no state with m_q below the profile window");
    write_profile(out, prefix + "_profile_widest.csv", sites, states[q]);
    diag["widest_state"] = {{"q", q}, {"m_q", states[q].mean}, {"delta_q", states[q].spread}};
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct FloquetSetup {
  int basis_size = 0;
  CouplingTable table;
  FloquetOperator op;
};

FloquetSetup setup_floquet(const ModelParams& params, const json& s, double tolerance,
                           json& diag) {
  int m = s.at("basis_size").get<int>();
  if (m <= 0) m = default_basis_size(params, positive(s, "analysed_cells"));
  if (m < 2) throw ConfigError("basis_size must be >= 2");
  const int band = converged_band_width(params.h, params.resonance, m);
  CouplingTable table = build_coupling_table(params, m, band);
  PropagationOptions opts;
  opts.tolerance = tolerance;
  FloquetOperator op = build_floquet_operator(params, table, opts);
  diag["basis_size"] = m;
  diag["band_width"] = band;
  diag["max_dropped_coupling"] = table.max_dropped();
  diag["unitarity_residual"] = op.unitarity_residual;
  diag["floquet_integrator"] = stats_json(op.stats);
  return {m, std::move(table), std::move(op)};
}

void run_cells(const ExperimentConfig& c, OutputDir& out, RunResult& r) {
  const auto part = cell_boundaries(c.params.h, c.params.resonance,
                                    c.settings.at("m_ceiling").get<double>());
  CsvWriter w(out.path("cells.csv"),
              {"cell", "m_lower", "m_upper", "m_upper_floor", "m_upper_ceil", "kr_upper", "width"});
  for (int i = 1; i <= part.count(); ++i) {
    w.field(i).field(part.lower(i)).field(part.upper(i));
    w.field(part.quantum_floor[i - 1]).field(part.quantum_ceil[i - 1]);
    w.field(part.upper_kr(i)).field(part.width(i));
    w.end_row();
  }
  out.add(w);
  r.diagnostics["cell_count"] = part.count();
  if (const auto ext = m_max_extent(c.params)) r.diagnostics["m_max_extent"] = *ext;
}

void run_chain(const ExperimentConfig& c, OutputDir& out, RunResult& r) {
  const auto& s = c.settings;
  const long offset = s.at("m_offset").get<long>();
  const int sites = s.at("sites").get<int>();
  const double window = s.at("m_window").get<double>();
  const auto chain = build_chain(c.params, offset, sites);
  auto spec = solve_chain(chain);
  const auto part = cell_boundaries(c.params.h, c.params.resonance,
                                    static_cast<double>(chain.sites.back()));
  classify_states(spec.states, part);

  double residual = 0.0;
  long in_window = 0, resident = 0, delocalized = 0;
  for (const auto& st : spec.states) {
    residual = std::max(residual, chain_residual(chain, st));
    if (st.mean < window) {
      ++in_window;
      if (st.residency == Residency::resident) ++resident;
      if (st.residency == Residency::delocalized) ++delocalized;
    }
  }
  write_states(out, "chain_states.csv", "E_q", spec.states);
  export_profiles(out, "chain", s, spec.sites, spec.states, window, r.diagnostics);
  if (s.at("export_coupling").get<bool>()) {
    const int n = c.params.resonance;
    CsvWriter w(out.path("coupling.csv"), {"m", "mp", "re", "im", "abs"});
    for (long m : chain.sites) {
      const cplx f = matrix_element_exact(static_cast<int>(m), static_cast<int>(m + n), c.params.h);
      w.field(m).field(m + n).field(f.real()).field(f.imag()).field(std::abs(f));
      w.end_row();
    }
    out.add(w);
  }
  auto& d = r.diagnostics;
  d["max_chain_residual"] = residual;
  d["states"] = spec.states.size();
  d["states_in_window"] = in_window;
  d["resident_in_window"] = resident;
  d["delocalized_in_window"] = delocalized;
  d["resident_fraction_in_window"] = in_window ? static_cast<double>(resident) / in_window : 0.0;
  if (const auto ext = m_max_extent(c.params)) d["m_max_extent"] = *ext;
}

void run_floquet(const ExperimentConfig& c, OutputDir& out, RunResult& r) {
  const auto& s = c.settings;
  auto setup = setup_floquet(c.params, s, s.at("tolerance").get<double>(), r.diagnostics);
  auto spec = quasienergy_spectrum(setup.op);
  const auto part = cell_boundaries(c.params.h, c.params.resonance, setup.basis_size);
  classify_states(spec.states, part);
  double window = s.at("m_window").get<double>();
  if (window <= 0.0) window = part.count() >= 2 ? part.upper(2) : setup.basis_size;

  write_states(out, "floquet_states.csv", "sigma_q", spec.states);
  export_profiles(out, "floquet", s, spec.sites, spec.states, window, r.diagnostics);
  std::vector<double> cell1;
  for (const auto& st : spec.states) {
    if (part.count() >= 1 && st.mean < part.upper(1)) cell1.push_back(st.spread);
  }
  r.diagnostics["eigenpair_residual"] = spec.max_residual;
  r.diagnostics["median_spread_cell1"] = median(cell1);
  r.diagnostics["states_cell1"] = cell1.size();
}

void run_lattice(const ExperimentConfig& c, OutputDir& out, RunResult& r) {
  const int m = positive(c.settings, "basis_size");
  const int l_max = positive(c.settings, "l_max");
  const auto table =
      build_coupling_table(c.params, m, converged_band_width(c.params.h, c.params.resonance, m));
  const auto spec = lattice2d_eigenproblem(c.params, table, l_max, true);
  const double zone = c.params.quasienergy_zone();
  CsvWriter w(out.path("lattice_states.csv"), {"k", "E", "sigma", "m_mean", "edge_weight"});
  for (int k = 0; k < spec.energies.size(); ++k) {
    const auto prof = spec.fock_profile(k);
    double mean = 0.0;
    for (int i = 0; i < m; ++i) mean += i * prof[i];
    double sigma = std::fmod(spec.energies(k) + 0.5 * c.params.h, zone);
    if (sigma < 0.0) sigma += zone;
    w.field(k).field(spec.energies(k)).field(sigma).field(mean).field(spec.edge_weight(k));
    w.end_row();
  }
  out.add(w);
  r.diagnostics["dimension"] = m * (2 * l_max + 1);
}

void run_evolve(const ExperimentConfig& c, OutputDir& out, RunResult& r) {
  const auto& s = c.settings;
  int m = s.at("basis_size").get<int>();
  if (m <= 0) m = default_basis_size(c.params, positive(s, "analysed_cells"));
  const int m0 = s.at("m0").get<int>();
  const double tau_end = s.at("tau_end").get<double>();
  const int samples = positive(s, "samples");
  if (m0 < 0 || m0 >= m) throw ConfigError("m0 lies outside the basis");
  if (!(tau_end > 0.0)) throw ConfigError("tau_end must be positive");
  const auto table =
      build_coupling_table(c.params, m, converged_band_width(c.params.h, c.params.resonance, m));
  PropagationOptions opts;
  opts.tolerance = s.at("tolerance").get<double>();
  opts.tail_fraction = s.at("tail_fraction").get<double>();
  opts.tail_tolerance = s.at("tail_tolerance").get<double>();
  const auto part = cell_boundaries(c.params.h, c.params.resonance, m);
  const double b1 = part.count() >= 1 ? part.upper(1) : m;

  FockState state = FockState::basis(m, m0);
  IntegratorStats stats;
  double max_tail = 0.0;
  std::optional<double> breach;
  CsvWriter w(out.path("evolution.csv"),
              {"tau", "norm", "m_mean", "p_cell1", "p_outside_cell1", "tail_mass"});
  for (int k = 0; k < samples; ++k) {
    const double tau = samples == 1 ? tau_end : tau_end * k / (samples - 1.0);
    if (tau > state.time) {
      PropagationReport rep;
      state = propagate(state, tau, c.params, table, opts, &rep);
      stats += rep.stats;
      max_tail = std::max(max_tail, rep.max_tail_mass);
      if (rep.tail_breach_time && !breach) breach = rep.tail_breach_time;
    }
    double norm = 0.0, mean = 0.0, inside = 0.0;
    for (int i = 0; i < m; ++i) {
      const double p = std::norm(state.amplitudes[i]);
      norm += p;
      mean += i * p;
      if (i <= b1) inside += p;
    }
    const double tail = tail_mass(state.amplitudes, opts.tail_fraction);
    w.field(tau).field(norm).field(mean / norm).field(inside).field(norm - inside).field(tail);
    w.end_row();
  }
  out.add(w);
  CsvWriter fin(out.path("final_distribution.csv"), {"m", "probability"});
  for (int i = 0; i < m; ++i) {
    fin.field(i).field(std::norm(state.amplitudes[i]));
    fin.end_row();
  }
  out.add(fin);
  r.diagnostics["basis_size"] = m;
  r.diagnostics["band_width"] = table.band_width();
  r.diagnostics["norm_drift"] = std::abs(state.norm_squared() - 1.0);
  r.diagnostics["max_tail_mass"] = max_tail;
  r.diagnostics["integrator"] = stats_json(stats);
  if (breach) {
    r.diagnostics["tail_breach_time"] = *breach;
    r.warnings.push_back("tail mass exceeded tolerance at tau=" + format_number(*breach));
  }
}

void run_time_average(const ExperimentConfig& c, OutputDir& out, RunResult& r) {
  const auto& s = c.settings;
  auto setup = setup_floquet(c.params, s, s.at("tolerance").get<double>(), r.diagnostics);
  PropagationOptions opts;
  opts.tolerance = s.at("tolerance").get<double>();
  opts.tail_fraction = s.at("tail_fraction").get<double>();
  opts.tail_tolerance = s.at("tail_tolerance").get<double>();
  const auto avg = time_averaged_distribution(
      setup.op, setup.table, s.at("m0").get<int>(), s.at("warmup").get<double>(),
      s.at("window_end").get<double>(), positive(s, "samples"), opts);
  const auto part = cell_boundaries(c.params.h, c.params.resonance, setup.basis_size);

  CsvWriter w(out.path("time_average.csv"), {"m", "probability", "cell"});
  for (int m = 0; m < setup.basis_size; ++m) {
    w.field(m).field(avg.probability[m]).field(part.cell_of(m));
    w.end_row();
  }
  out.add(w);

  const int cells = part.count();
  std::vector<double> weight(cells + 1, 0.0);
  for (int m = 0; m < setup.basis_size; ++m) weight[part.cell_of(m) - 1] += avg.probability[m];
  CsvWriter cw(out.path("cell_weights.csv"),
               {"cell", "m_lower", "m_upper", "probability", "density"});
  for (int i = 1; i <= cells; ++i) {
    cw.field(i).field(part.lower(i)).field(part.upper(i)).field(weight[i - 1]);
    cw.field(weight[i - 1] / part.width(i));
    cw.end_row();
  }
  out.add(cw);

  auto& d = r.diagnostics;
  double total = 0.0;
  for (double p : avg.probability) total += p;
  d["probability_outside_cell1"] = cells >= 1 ? total - weight[0] : 0.0;
  if (cells >= 2) {
    double lo = 1.0, hi = 0.0;
    for (int m = 0; m < setup.basis_size && m <= part.upper(2); ++m) {
      lo = std::min(lo, avg.probability[m]);
      hi = std::max(hi, avg.probability[m]);
    }
    d["uniformity_ratio_cells12"] = lo / hi;
    const double d1 = weight[0] / part.width(1), d2 = weight[1] / part.width(2);
    d["density_ratio_cells12"] = std::min(d1, d2) / std::max(d1, d2);
  }
  d["max_tail_mass"] = avg.max_tail_mass;
  d["fraction_integrator"] = stats_json(avg.stats);
  if (avg.tail_breach_time) {
    d["tail_breach_time"] = *avg.tail_breach_time;
    r.warnings.push_back("tail mass exceeded tolerance at tau=" +
                         format_number(*avg.tail_breach_time));
  }
}

void run_classical(const ExperimentConfig& c, OutputDir& out, RunResult& r) {
  const auto& s = c.settings;
  const int cells = positive(s, "cells");
  const int per_cell = positive(s, "per_cell");
  const int angles = positive(s, "angles");
  const int periods = positive(s, "periods");
  const double j_last = specfun::bessel_zeros(c.params.resonance, cells).zeros.back();
  const auto part = cell_boundaries(c.params.h, c.params.resonance,
                                    j_last * j_last / (2.0 * c.params.h) * (1.0 + 1e-12));
  const auto seeds = seed_cells(part, cells, per_cell, angles);
  const auto section =
      stroboscopic_section(c.params, seeds, periods, s.at("tolerance").get<double>());

  CsvWriter w(out.path("section.csv"), {"trajectory_id", "s", "kr", "theta"});
  IntegratorStats stats;
  for (const auto& tr : section.trajectories) {
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
      w.field(tr.id).field(static_cast<long>(k)).field(tr.samples[k].amplitude);
      w.field(tr.samples[k].folded);
      w.end_row();
    }
    stats += tr.stats;
  }
  out.add(w);
  const auto leave = cell_leave_fractions(section, part, cells, per_cell * angles);
  CsvWriter cw(out.path("cell_map.csv"), {"cell", "kr_lower", "kr_upper", "probes", "leave_fraction"});
  json fractions = json::array();
  for (const auto& cs : leave) {
    cw.field(cs.cell).field(cs.kr_lower).field(cs.kr_upper).field(cs.probes);
    cw.field(cs.leave_fraction);
    cw.end_row();
    fractions.push_back(cs.leave_fraction);
  }
  out.add(cw);
  r.diagnostics["leave_fractions"] = fractions;
  r.diagnostics["integrator"] = stats_json(stats);
}

void write_manifest(const fs::path& dir, const ExperimentConfig& c, const RunResult& r) {
  json files = json::array();
  for (const auto& f : r.files) files.push_back({{"name", f.name}, {"rows", f.rows}});
  const json manifest = {{"tool", "ionloc"},
                         {"version", IONLOC_VERSION},
                         {"config", to_json(c)},
                         {"wall_time_s", r.wall_seconds},
                         {"diagnostics", r.diagnostics},
                         {"warnings", r.warnings},
                         {"files", files}};
  const fs::path tmp = dir / (std::string(kManifestName) + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << manifest.dump(2) << '\n';
    if (!os) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, dir / kManifestName);
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.params.validate();
  const fs::path dir(config.output);
  prepare_output_dir(dir);
  OutputDir out(dir);
  RunResult result;
  try {
    switch (config.experiment) {
      case Experiment::cells: run_cells(config, out, result); break;
      case Experiment::chain_spectrum: run_chain(config, out, result); break;
      case Experiment::floquet_spectrum: run_floquet(config, out, result); break;
      case Experiment::lattice2d: run_lattice(config, out, result); break;
      case Experiment::evolve: run_evolve(config, out, result); break;
      case Experiment::time_average: run_time_average(config, out, result); break;
      case Experiment::classical_section: run_classical(config, out, result); break;
    }
  } catch (const json::exception& e) {
    out.discard();
    throw ConfigError(std::string("settings: ") + e.what());
  } catch (...) {
    out.discard();
    throw;
  }
  result.files = std::move(out.files());
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir, config, result);
  return result;
}

}  // namespace ionloc::driver
