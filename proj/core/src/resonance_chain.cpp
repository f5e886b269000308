#include "ionloc/resonance_chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ionloc/errors.hpp"
#include "ionloc/tridiagonal.hpp"

namespace ionloc {

StateMoments eigenstate_stats(std::span<const double> probabilities, std::span<const long> sites) {
  if (probabilities.size() != sites.size()) {
    throw ConfigError("eigenstate_stats: amplitude and site counts differ");
  }
  double total = 0.0, first = 0.0;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    total += probabilities[k];
    first += probabilities[k] * static_cast<double>(sites[k]);
  }
  StateMoments out;
  if (total <= 0.0) return out;
  out.mean = first / total;
  double second = 0.0;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const double d = static_cast<double>(sites[k]) - out.mean;
    second += probabilities[k] * d * d;
  }
  out.spread = std::sqrt(second / total);
  return out;
}

StateMoments eigenstate_stats(std::span<const cplx> amplitudes, std::span<const long> sites) {
  std::vector<double> p(amplitudes.size());
  std::transform(amplitudes.begin(), amplitudes.end(), p.begin(),
                 [](const cplx& a) { return std::norm(a); });
  return eigenstate_stats(std::span<const double>(p), sites);
}

ResonanceChain build_chain(const ModelParams& params, long m_offset, int site_count,
                           const CouplingTable* table) {
  params.validate();
  if (m_offset < 0) throw ConfigError("chain offset must be >= 0");
  if (site_count < 2) throw ConfigError("chain needs at least two sites");
  const int n_res = params.resonance;
  const long last = m_offset + static_cast<long>(site_count - 1) * n_res;
  if (table != nullptr) {
    if (last >= table->basis_size()) {
      throw ConfigError("chain site m=" + std::to_string(last) +
                        " lies beyond the coupling-table basis of " +
                        std::to_string(table->basis_size()));
    }
    if (table->band_width() < n_res) throw ConfigError("coupling table band narrower than N");
  }

  ResonanceChain chain;
  chain.params = params;
  chain.m_offset = m_offset;
  const long r = m_offset % n_res;
  chain.shift = params.quasienergy_zone() * static_cast<double>(r) / n_res;
  chain.sites.resize(site_count);
  chain.diagonal.resize(site_count);
  for (int k = 0; k < site_count; ++k) {
    const long m = m_offset + static_cast<long>(k) * n_res;
    chain.sites[k] = m;
    chain.diagonal[k] =
        chain.shift + params.h * params.detuning * static_cast<double>(m - r) / n_res;
  }

  chain.coupling.resize(site_count - 1);
  chain.hopping.resize(site_count - 1);
  chain.gauge.resize(site_count);
  chain.gauge[0] = 1.0;
  for (int k = 0; k + 1 < site_count; ++k) {
    const int m = static_cast<int>(chain.sites[k]);
    const cplx f = table != nullptr ? (*table)(m, m + n_res)
                                    : matrix_element_exact(m, m + n_res, params.h);
    chain.coupling[k] = 0.5 * params.epsilon * f;
    chain.hopping[k] = std::abs(chain.coupling[k]);
    cplx phase = std::conj(f) / std::abs(f);
    if (!std::isfinite(phase.real())) phase = 1.0;
    chain.gauge[k + 1] = chain.gauge[k] * phase;
  }
  return chain;
}

ResonanceChain mirrored(const ResonanceChain& chain) {
  ResonanceChain out = chain;
  std::reverse(out.sites.begin(), out.sites.end());
  std::reverse(out.diagonal.begin(), out.diagonal.end());
  std::reverse(out.hopping.begin(), out.hopping.end());
  std::reverse(out.coupling.begin(), out.coupling.end());
  for (auto& c : out.coupling) c = std::conj(c);
  out.gauge.assign(out.sites.size(), 1.0);
  for (std::size_t k = 0; k + 1 < out.sites.size(); ++k) {
    const double mag = std::abs(out.coupling[k]);
    out.gauge[k + 1] = out.gauge[k] * (mag > 0.0 ? std::conj(out.coupling[k]) / mag : cplx(1.0));
  }
  return out;
}

ChainSpectrum solve_chain(const ResonanceChain& chain) {
  const auto eig = solve_symmetric_tridiagonal(chain.diagonal, chain.hopping);
  const int n = chain.size();
  ChainSpectrum out;
  out.sites = chain.sites;
  out.states.resize(n);
  for (int q = 0; q < n; ++q) {
    auto& st = out.states[q];
    st.quasienergy = eig.values[q];
    st.amplitudes.resize(n);
    double norm = 0.0;
    for (int k = 0; k < n; ++k) norm += eig.vectors(k, q) * eig.vectors(k, q);
    norm = std::sqrt(norm);
    // Fix the overall sign so that the largest component is positive.
    int peak = 0;
    for (int k = 1; k < n; ++k) {
      if (std::abs(eig.vectors(k, q)) > std::abs(eig.vectors(peak, q))) peak = k;
    }
    const double sign = eig.vectors(peak, q) < 0.0 ? -1.0 : 1.0;
    for (int k = 0; k < n; ++k) st.amplitudes[k] = chain.gauge[k] * (sign * eig.vectors(k, q) / norm);
    const auto mom = eigenstate_stats(std::span<const cplx>(st.amplitudes),
                                      std::span<const long>(out.sites));
    st.mean = mom.mean;
    st.spread = mom.spread;
  }
  std::stable_sort(out.states.begin(), out.states.end(),
                   [](const QuasienergyState& a, const QuasienergyState& b) {
                     return a.mean < b.mean;
                   });
  return out;
}

double chain_residual(const ResonanceChain& chain, const QuasienergyState& state) {
  const int n = chain.size();
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    cplx lhs = (state.quasienergy - chain.diagonal[k]) * state.amplitudes[k];
    cplx rhs = 0.0;
    if (k + 1 < n) rhs += chain.coupling[k] * state.amplitudes[k + 1];
    if (k > 0) rhs += std::conj(chain.coupling[k - 1]) * state.amplitudes[k - 1];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

void classify_states(std::span<QuasienergyState> states, const CellPartition& partition) {
  for (auto& st : states) {
    st.cell = partition.cell_of(st.mean);
    if (st.cell > partition.count()) {
      st.residency = Residency::unresolved;
      continue;
    }
    st.residency = st.spread <= partition.width(st.cell) ? Residency::resident
                                                         : Residency::delocalized;
  }
}

std::vector<cplx> to_fock_amplitudes(const ChainSpectrum& spectrum, const QuasienergyState& state,
                                     int basis_size) {
  std::vector<cplx> out(basis_size, 0.0);
  for (std::size_t k = 0; k < spectrum.sites.size(); ++k) {
    const long m = spectrum.sites[k];
    if (m >= 0 && m < basis_size) out[m] = std::conj(state.amplitudes[k]);
  }
  return out;
}

}  // namespace ionloc
