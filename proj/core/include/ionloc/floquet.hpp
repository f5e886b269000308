#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ionloc/integrator.hpp"
#include "ionloc/model.hpp"
#include "ionloc/resonance_chain.hpp"

namespace ionloc {

struct PropagationOptions {
  double tolerance = 1e-10;     // local error per step, absolute and relative
  double tail_fraction = 0.9;   // tail = states m > tail_fraction * M
  double tail_tolerance = 1e-6;
  bool renormalize = false;
};

/// Amplitudes c_m, m = 0..M-1, of the oscillator eigenstates at time tau.
struct FockState {
  std::vector<cplx> amplitudes;
  double time = 0.0;

  static FockState basis(int basis_size, int m, double time = 0.0);
  double norm_squared() const;
};

struct PropagationReport {
  IntegratorStats stats;
  double norm_drift = 0.0;  // |(|c(end)|^2 - |c(start)|^2)|
  double max_tail_mass = 0.0;
  std::optional<double> tail_breach_time;
};

/// Probability carried by the states m > fraction * M.
double tail_mass(std::span<const cplx> amplitudes, double fraction);

/// dc_m/dtau = -(i/h)[h(m+1/2) c_m + (eps/2) sum_n (e^{-i mu tau} F_{m,m+n}
///             + e^{i mu tau} F*_{m,m+n}) c_{m+n}], summed over the band.
void schrodinger_rhs(std::span<const cplx> amplitudes, double tau, const ModelParams& params,
                     const CouplingTable& table, std::span<cplx> derivative);

/// Integrates the amplitude equations from state.time to tau_to >= state.time.
/// Throws NumericalError on step-size underflow. A tail-mass breach is
/// recorded in the report, not thrown.
FockState propagate(const FockState& state, double tau_to, const ModelParams& params,
                    const CouplingTable& table, const PropagationOptions& options = {},
                    PropagationReport* report = nullptr);

/// One-period evolution operator U(T); column j is the propagated basis
/// state |j>.
struct FloquetOperator {
  ModelParams params;
  Eigen::MatrixXcd matrix;
  IntegratorStats stats;
  double unitarity_residual = 0.0;  // max |U^dagger U - 1|
  int band_width = 0;
  double max_dropped_coupling = 0.0;

  int basis_size() const { return static_cast<int>(matrix.rows()); }
};

double unitarity_residual(const Eigen::MatrixXcd& u);

/// Columns are propagated in independent fixed-size blocks, concurrently.
/// Throws GateError when the unitarity residual exceeds 1e-6.
FloquetOperator build_floquet_operator(const ModelParams& params, const CouplingTable& table,
                                       const PropagationOptions& options = {});
FloquetOperator build_floquet_operator(const ModelParams& params, int basis_size,
                                       double tolerance = 1e-10);

/// Default truncation ceil(1.5 * m_c) where m_c is the boundary of the last
/// analysed resonance cell.
int default_basis_size(const ModelParams& params, int analysed_cells);

struct FloquetSpectrum {
  std::vector<long> sites;               // 0..M-1
  std::vector<QuasienergyState> states;  // sorted by mean; quasienergy in [0, h mu)
  double max_residual = 0.0;             // max |U v - lambda v|
};

/// Eigenpairs of U(T) by joint diagonalization of the commuting Hermitian
/// pair (U+U^dagger)/2, (U-U^dagger)/2i. Subspaces whose eigenvalues in both
/// members spread less than `cluster_tolerance` are treated as degenerate.
FloquetSpectrum quasienergy_spectrum(const FloquetOperator& op, double cluster_tolerance = 1e-8);

/// Quasienergy of a unitary eigenvalue, sigma = -h arg(lambda) / T in [0, h mu).
double quasienergy_of(cplx eigenvalue, const ModelParams& params);

/// |a - b| on a circle of circumference `period`.
double circular_distance(double a, double b, double period);

struct TimeAverage {
  std::vector<double> probability;  // indexed by m
  std::vector<double> sample_times;
  double max_tail_mass = 0.0;
  std::optional<double> tail_breach_time;
  IntegratorStats stats;
};

/// Average of |c_m(tau)|^2 over `samples` equally spaced times in
/// [warmup, window_end] for c(0) = |m0>. Whole periods are taken by powers of
/// U(T); the remaining fraction of a period is integrated directly.
TimeAverage time_averaged_distribution(const FloquetOperator& op, const CouplingTable& table,
                                       int m0, double warmup, double window_end, int samples,
                                       const PropagationOptions& options = {});

/// Truncated quasienergy lattice, sites (m, l) with 0 <= m < M, |l| <= L:
///   E A_{m,l} = h(m - mu l) A_{m,l}
///             + (eps/2) sum_n (F_{m,m+n} A_{m+n,l+1} + F*_{m,m+n} A_{m+n,l-1}).
struct Lattice2DSpectrum {
  int basis_size = 0;
  int l_max = 0;
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXcd vectors;  // empty unless requested

  int index(int m, int l) const { return (l + l_max) * basis_size + m; }
  /// sum_l |A_{m,l}|^2 for eigenvector k.
  std::vector<double> fock_profile(int k) const;
  /// Weight of eigenvector k on the outermost `depth` rows |l| > L - depth.
  double edge_weight(int k, int depth = 1) const;
};

inline constexpr int kLatticeDimensionCap = 4096;

Eigen::MatrixXcd lattice2d_hamiltonian(const ModelParams& params, const CouplingTable& table,
                                       int l_max);

/// Throws NumericalError when M (2L+1) exceeds `dimension_cap`.
Lattice2DSpectrum lattice2d_eigenproblem(const ModelParams& params, const CouplingTable& table,
                                         int l_max, bool with_vectors = true,
                                         int dimension_cap = kLatticeDimensionCap);

}  // namespace ionloc
