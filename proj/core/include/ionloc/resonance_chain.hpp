#pragma once

#include <span>
#include <vector>

#include "ionloc/model.hpp"

namespace ionloc {

enum class Residency { resident, delocalized, unresolved };

/// One eigenpair of a quasienergy problem together with its Fock-index
/// moments. `amplitudes` are indexed like the owning spectrum's `sites`.
struct QuasienergyState {
  double quasienergy = 0.0;
  std::vector<cplx> amplitudes;
  double mean = 0.0;    // m_q = sum |A_m|^2 m
  double spread = 0.0;  // Delta_q = sqrt(sum |A_m|^2 (m - m_q)^2)
  int cell = 0;         // 1-based resonance cell of m_q, 0 until classified
  Residency residency = Residency::unresolved;
};

struct StateMoments {
  double mean = 0.0;
  double spread = 0.0;
};

/// Mean and root-variance of the Fock index m under |amplitude|^2.
StateMoments eigenstate_stats(std::span<const cplx> amplitudes, std::span<const long> sites);
StateMoments eigenstate_stats(std::span<const double> probabilities, std::span<const long> sites);

/// Nearest-neighbour chain on the sub-lattice m_k = m_offset + k N:
///   (E - shift - h delta (m_k - r)/N) A_k = (eps/2)(F_{m_k,m_k+N} A_{k+1} + F*_{m_k-N,m_k} A_{k-1})
/// with r = m_offset mod N and shift = h mu {m_offset / N}. Site phases
/// `gauge` turn the complex couplings into the non-negative `hopping`.
struct ResonanceChain {
  ModelParams params;
  long m_offset = 0;
  std::vector<long> sites;
  std::vector<double> diagonal;
  std::vector<cplx> coupling;  // (eps/2) F_{m_k, m_k+N}
  std::vector<double> hopping;  // |coupling|
  std::vector<cplx> gauge;      // A_k = gauge_k * B_k, B real
  double shift = 0.0;

  int size() const { return static_cast<int>(sites.size()); }
};

/// Throws ConfigError for m_offset < 0, site_count < 2, or, when `table` is
/// given, sites whose couplings fall outside its basis.
ResonanceChain build_chain(const ModelParams& params, long m_offset, int site_count,
                           const CouplingTable* table = nullptr);

/// Same chain with the site order reversed (k -> K-1-k).
ResonanceChain mirrored(const ResonanceChain& chain);

struct ChainSpectrum {
  std::vector<long> sites;
  std::vector<QuasienergyState> states;  // sorted by mean
};

ChainSpectrum solve_chain(const ResonanceChain& chain);

/// max_k |(H A - E A)_k| in the complex convention of the chain equation.
double chain_residual(const ResonanceChain& chain, const QuasienergyState& state);

/// Assigns cell and residency: resident when m_q lies in cell i and
/// Delta_q <= width of cell i; delocalized otherwise; unresolved when m_q
/// is beyond the partition.
void classify_states(std::span<QuasienergyState> states, const CellPartition& partition);

/// Chain amplitudes expressed as Fock-space amplitudes c_m(0) of the full
/// Schroedinger dynamics, which carry the complex-conjugate phase
/// convention of the chain equation.
std::vector<cplx> to_fock_amplitudes(const ChainSpectrum& spectrum, const QuasienergyState& state,
                                     int basis_size);

}  // namespace ionloc
