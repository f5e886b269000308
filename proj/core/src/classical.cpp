#include "ionloc/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ionloc/errors.hpp"
#include "ode.hpp"

namespace ionloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Flow {
  const ModelParams& params;
  void operator()(const detail::OdeState& y, detail::OdeState& dydt, double tau) const {
    dydt[0] = y[1];
    dydt[1] = -y[0] + params.epsilon * std::sin(y[0] - params.mu() * tau);
  }
};

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

}  // namespace

std::array<double, 2> flow_rhs(const PhasePoint& point, const ModelParams& params) {
  return {point.p, -point.x + params.epsilon * std::sin(point.x - params.mu() * point.tau)};
}

AngleActionPoint to_angle_action(const PhasePoint& point, int resonance) {
  AngleActionPoint out;
  out.amplitude = std::hypot(point.x, point.p);
  out.action = 0.5 * out.amplitude * out.amplitude;
  out.angle = out.amplitude > 0.0 ? wrap_angle(std::atan2(point.x, point.p)) : 0.0;
  out.folded = wrap_angle(resonance * out.angle);
  return out;
}

PhasePoint from_angle_action(double amplitude, double angle, double tau) {
  return {amplitude * std::sin(angle), amplitude * std::cos(angle), tau};
}

PhasePoint advance(const PhasePoint& point, double tau_to, const ModelParams& params,
                   double tolerance, IntegratorStats* stats) {
  detail::OdeState y{point.x, point.p};
  const auto s = detail::integrate_adaptive(Flow{params}, y, point.tau, tau_to, tolerance, 0.05);
  if (stats != nullptr) *stats += s;
  if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
    throw NumericalError("classical trajectory became non-finite");
  }
  return {y[0], y[1], tau_to};
}

Trajectory integrate_trajectory(const PhasePoint& start, int periods, const ModelParams& params,
                                double tolerance) {
  if (periods < 1) throw ConfigError("trajectory needs at least one period");
  params.validate();
  const double period = params.period();
  Trajectory tr;
  tr.start = start;
  tr.samples.reserve(periods + 1);
  PhasePoint cur{start.x, start.p, 0.0};
  tr.samples.push_back(to_angle_action(cur, params.resonance));
  for (int s = 1; s <= periods; ++s) {
    cur = advance(cur, s * period, params, tolerance, &tr.stats);
    tr.samples.push_back(to_angle_action(cur, params.resonance));
  }
  return tr;
}

std::vector<PhasePoint> seed_cells(const CellPartition& partition, int cells, int per_cell,
                                   int angles) {
  if (cells > partition.count()) throw ConfigError("partition resolves fewer cells than requested");
  std::vector<PhasePoint> seeds;
  seeds.reserve(static_cast<std::size_t>(cells) * per_cell * angles);
  for (int c = 1; c <= cells; ++c) {
    const double lo = partition.lower_kr(c);
    const double hi = partition.upper_kr(c);
    for (int a = 0; a < per_cell; ++a) {
      const double kr = lo + (hi - lo) * (a + 0.5) / per_cell;
      for (int b = 0; b < angles; ++b) {
        seeds.push_back(from_angle_action(kr, kTwoPi * b / angles));
      }
    }
  }
  return seeds;
}

StroboscopicSection stroboscopic_section(const ModelParams& params,
                                         const std::vector<PhasePoint>& seeds, int periods,
                                         double tolerance) {
  StroboscopicSection section;
  section.params = params;
  section.periods = periods;
  section.trajectories.resize(seeds.size());
  std::vector<std::string> failures(seeds.size());
  const long count = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < count; ++i) {
    try {
      section.trajectories[i] = integrate_trajectory(seeds[i], periods, params, tolerance);
      section.trajectories[i].id = static_cast<int>(i);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw NumericalError(f);
  }
  return section;
}

std::vector<CellStability> classical_cell_map(const ModelParams& params, double kr_max,
                                              const CellMapOptions& options) {
  params.validate();
  const auto partition = cell_boundaries(params.h, params.resonance, kr_max * kr_max / (2.0 * params.h));
  if (partition.count() < 1) throw ConfigError("kr_max must exceed the first Bessel zero");
  const int cells = partition.count();
  const auto seeds = seed_cells(partition, cells, options.amplitudes_per_cell, options.angles);
  const auto section = stroboscopic_section(params, seeds, options.periods, options.tolerance);

  return cell_leave_fractions(section, partition, cells,
                              options.amplitudes_per_cell * options.angles);
}

std::vector<CellStability> cell_leave_fractions(const StroboscopicSection& section,
                                                const CellPartition& partition, int cells,
                                                int probes_per_cell) {
  if (cells > partition.count() ||
      section.trajectories.size() < static_cast<std::size_t>(cells) * probes_per_cell) {
    throw ConfigError("section does not hold probes_per_cell trajectories for every cell");
  }
  std::vector<CellStability> out(cells);
  for (int c = 1; c <= cells; ++c) {
    auto& cs = out[c - 1];
    cs.cell = c;
    cs.kr_lower = partition.lower_kr(c);
    cs.kr_upper = partition.upper_kr(c);
    cs.probes = probes_per_cell;
    int left = 0;
    for (int k = 0; k < probes_per_cell; ++k) {
      const auto& tr = section.trajectories[static_cast<std::size_t>(c - 1) * probes_per_cell + k];
      const bool escaped = std::any_of(tr.samples.begin(), tr.samples.end(), [&](const auto& s) {
        return s.amplitude < cs.kr_lower || s.amplitude > cs.kr_upper;
      });
      if (escaped) ++left;
    }
    cs.leave_fraction = static_cast<double>(left) / probes_per_cell;
  }
  return out;
}

double stroboscopic_jacobian(const PhasePoint& point, const ModelParams& params, double step,
                             double tolerance) {
  const double t1 = point.tau + params.period();
  auto map = [&](double dx, double dp) {
    return advance({point.x + dx, point.p + dp, point.tau}, t1, params, tolerance);
  };
  const auto xp = map(step, 0.0), xm = map(-step, 0.0);
  const auto pp = map(0.0, step), pm = map(0.0, -step);
  const double a = (xp.x - xm.x) / (2.0 * step);
  const double b = (pp.x - pm.x) / (2.0 * step);
  const double c = (xp.p - xm.p) / (2.0 * step);
  const double d = (pp.p - pm.p) / (2.0 * step);
  return a * d - b * c;
}

}  // namespace ionloc
