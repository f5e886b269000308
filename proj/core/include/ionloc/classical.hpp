#pragma once

#include <array>
#include <vector>

#include "ionloc/integrator.hpp"
#include "ionloc/model.hpp"

namespace ionloc {

/// Classical phase point of H = X^2/2 + P^2/2 + eps cos(X - mu tau).
struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
  double tau = 0.0;
};

/// X = kr sin(angle), P = kr cos(angle), kr = sqrt(2 I);
/// folded = N * angle mod 2 pi.
struct AngleActionPoint {
  double action = 0.0;
  double amplitude = 0.0;
  double angle = 0.0;
  double folded = 0.0;
};

std::array<double, 2> flow_rhs(const PhasePoint& point, const ModelParams& params);

AngleActionPoint to_angle_action(const PhasePoint& point, int resonance);
PhasePoint from_angle_action(double amplitude, double angle, double tau = 0.0);

/// Integrates the flow from point.tau to tau_to (either direction).
PhasePoint advance(const PhasePoint& point, double tau_to, const ModelParams& params,
                   double tolerance = 1e-11, IntegratorStats* stats = nullptr);

struct Trajectory {
  int id = 0;
  PhasePoint start;
  std::vector<AngleActionPoint> samples;  // s = 0..periods at tau_s = s T
  IntegratorStats stats;
};

/// Samples the trajectory once per drive period. `start.tau` is taken as
/// tau = 0, so sample s sits at exactly s T.
Trajectory integrate_trajectory(const PhasePoint& start, int periods, const ModelParams& params,
                                double tolerance = 1e-11);

struct StroboscopicSection {
  ModelParams params;
  int periods = 0;
  std::vector<Trajectory> trajectories;
};

/// Seeds `per_cell` amplitudes spread over the interior of each of the first
/// `cells` resonance cells, times `angles` equally spaced angles.
std::vector<PhasePoint> seed_cells(const CellPartition& partition, int cells, int per_cell,
                                   int angles);

/// Trajectories are integrated concurrently.
StroboscopicSection stroboscopic_section(const ModelParams& params,
                                         const std::vector<PhasePoint>& seeds, int periods,
                                         double tolerance = 1e-11);

struct CellMapOptions {
  int amplitudes_per_cell = 20;
  int angles = 8;
  int periods = 500;
  double tolerance = 1e-11;
};

struct CellStability {
  int cell = 0;
  double kr_lower = 0.0;
  double kr_upper = 0.0;  // kr_i = j_{N,i}
  int probes = 0;
  double leave_fraction = 0.0;  // probes whose sampled kr left [kr_lower, kr_upper]
};

/// Classical resonance cells below kr_max with an escape-fraction chaos
/// proxy per cell.
std::vector<CellStability> classical_cell_map(const ModelParams& params, double kr_max,
                                              const CellMapOptions& options = {});

/// Leave fractions from a section seeded by seed_cells(partition, cells, ...),
/// i.e. probes_per_cell consecutive trajectories per cell.
std::vector<CellStability> cell_leave_fractions(const StroboscopicSection& section,
                                                const CellPartition& partition, int cells,
                                                int probes_per_cell);

/// Determinant of the finite-difference Jacobian of the one-period map at
/// `point`.
double stroboscopic_jacobian(const PhasePoint& point, const ModelParams& params,
                             double step = 1e-5, double tolerance = 1e-12);

}  // namespace ionloc
