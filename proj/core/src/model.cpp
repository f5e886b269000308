#include "ionloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "ionloc/csv.hpp"
#include "ionloc/errors.hpp"
#include "ionloc/specfun.hpp"

namespace ionloc {

namespace {

cplx i_power(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// f_{m,n} for m = 0..count-1 at fixed offset n, where
// F_{m,m+n} = i^n x^{n/2} e^{-x/2} L_m^n(x) sqrt(m!/(m+n)!), x = h/2.
std::vector<double> exact_diagonal(double h, int n, int count) {
  const double x = 0.5 * h;
  const double pre = std::exp(0.5 * n * std::log(x) - 0.5 * x);
  std::vector<double> out(count);
  if (count == 0) return out;
  double prev = std::exp(-0.5 * std::lgamma(n + 1.0));
  out[0] = pre * prev;
  if (count == 1) return out;
  double cur = (n + 1.0 - x) * prev / std::sqrt(n + 1.0);
  out[1] = pre * cur;
  for (int k = 1; k + 1 < count; ++k) {
    const double next = ((2.0 * k + 1.0 + n - x) * cur - std::sqrt(k * (k + n + 0.0)) * prev) /
                        std::sqrt((k + 1.0) * (k + 1.0 + n));
    prev = cur;
    cur = next;
    out[k + 1] = pre * cur;
  }
  return out;
}

double asymptotic_real(int m, int n, double h) {
  double log_ratio = 0.5 * n * std::log(static_cast<double>(m));
  for (int k = 1; k <= n; ++k) log_ratio -= 0.5 * std::log(static_cast<double>(m + k));
  return std::exp(log_ratio - 0.25 * h) * specfun::bessel_j(n, std::sqrt(2.0 * m * h));
}

double max_abs_on_diagonal(double h, int n, int basis_size) {
  if (n >= basis_size) return 0.0;
  const auto d = exact_diagonal(h, n, basis_size - n);
  double mx = 0.0;
  for (double v : d) mx = std::max(mx, std::abs(v));
  return mx;
}

}  // namespace

double ModelParams::period() const { return 2.0 * std::numbers::pi / mu(); }

void ModelParams::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be positive and finite");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be non-negative and finite");
  }
  if (resonance < 1) throw ConfigError("resonance number N must be >= 1");
  if (!(std::abs(detuning) < 0.5)) throw ConfigError("detuning must satisfy |delta| < 1/2");
}

std::ostream& operator<<(std::ostream& os, const ModelParams& p) {
  return os << "h=" << p.h << " eps=" << p.epsilon << " N=" << p.resonance
            << " delta=" << p.detuning;
}

cplx matrix_element_exact(int m, int mp, double h) {
  if (m < 0 || mp < 0) throw ConfigError("matrix element indices must be non-negative");
  const int lo = std::min(m, mp);
  const int n = std::abs(m - mp);
  const double x = 0.5 * h;
  const double value =
      std::exp(0.5 * n * std::log(x) - 0.5 * x) * specfun::laguerre_normalized(lo, n, x);
  return i_power(n) * value;
}

cplx matrix_element_asymptotic(int m, int n, double h) {
  if (m < 1 || n < 0) throw ConfigError("asymptotic matrix element needs m >= 1, n >= 0");
  return i_power(n) * asymptotic_real(m, n, h);
}

CouplingTable::CouplingTable(double h, int basis_size, int band_width, CouplingMode mode)
    : h_(h), basis_size_(basis_size), band_width_(band_width), mode_(mode) {
  if (basis_size < 1) throw ConfigError("basis size must be >= 1");
  if (band_width < 0) throw ConfigError("band width must be >= 0");
  band_width_ = std::min(band_width, basis_size - 1);
  reduced_.assign(static_cast<std::size_t>(basis_size) * (band_width_ + 1), 0.0);
  for (int n = 0; n <= band_width_; ++n) {
    const int count = basis_size - n;
    if (mode == CouplingMode::exact) {
      const auto diag = exact_diagonal(h, n, count);
      for (int m = 0; m < count; ++m) {
        reduced_[static_cast<std::size_t>(m) * (band_width_ + 1) + n] = diag[m];
      }
    } else {
      // The Bessel form is singular at m = 0; that row keeps the exact value.
      const auto first = exact_diagonal(h, n, 1);
      reduced_[n] = first[0];
      for (int m = 1; m < count; ++m) {
        reduced_[static_cast<std::size_t>(m) * (band_width_ + 1) + n] = asymptotic_real(m, n, h);
      }
    }
  }
  for (int n = band_width_ + 1; n <= std::min(band_width_ + 2, basis_size - 1); ++n) {
    max_dropped_ = std::max(max_dropped_, max_abs_on_diagonal(h, n, basis_size));
  }
}

cplx CouplingTable::operator()(int m, int mp) const {
  if (m < 0 || mp < 0 || m >= basis_size_ || mp >= basis_size_) return {};
  const int n = std::abs(m - mp);
  if (n > band_width_) return {};
  return i_power(n) * real_part(std::min(m, mp), n);
}

void CouplingTable::check_tail(double tolerance) const {
  if (max_dropped_ > tolerance) {
    std::ostringstream msg;
    msg << "coupling band " << band_width_ << " drops |F| = " << max_dropped_
        << " > tolerance " << tolerance;
    throw GateError(msg.str());
  }
}

void CouplingTable::write_csv(std::ostream& os) const {
  os << "m,mp,re,im\n";
  for (int m = 0; m < basis_size_; ++m) {
    for (int mp = std::max(0, m - band_width_); mp <= std::min(basis_size_ - 1, m + band_width_);
         ++mp) {
      const cplx f = (*this)(m, mp);
      os << m << ',' << mp << ',' << format_number(f.real()) << ',' << format_number(f.imag()) << '\n';
    }
  }
}

int default_band_width(double h, int resonance, int basis_size) {
  const int from_bessel = static_cast<int>(std::ceil(6.0 * std::sqrt(h * basis_size)));
  return std::clamp(std::max(3 * resonance, from_bessel), 0, std::max(0, basis_size - 1));
}

int converged_band_width(double h, int resonance, int basis_size, double tail_tolerance) {
  int band = default_band_width(h, resonance, basis_size);
  while (band < basis_size - 1) {
    const double dropped = std::max(max_abs_on_diagonal(h, band + 1, basis_size),
                                    max_abs_on_diagonal(h, band + 2, basis_size));
    if (dropped < tail_tolerance) break;
    ++band;
  }
  return band;
}

CouplingTable build_coupling_table(const ModelParams& params, int basis_size, int band_width,
                                   CouplingMode mode) {
  params.validate();
  return CouplingTable(params.h, basis_size, band_width, mode);
}

int CellPartition::cell_of(double m) const {
  const auto it = std::lower_bound(quantum.begin(), quantum.end(), m);
  return static_cast<int>(it - quantum.begin()) + 1;
}

int CellPartition::cell_of_amplitude(double kr) const {
  const auto it = std::lower_bound(classical.begin(), classical.end(), kr);
  return static_cast<int>(it - classical.begin()) + 1;
}

CellPartition cell_boundaries(double h, int resonance, double m_ceiling) {
  if (!(h > 0.0)) throw ConfigError("h must be positive");
  CellPartition part;
  part.h = h;
  part.resonance = resonance;
  int want = 4;
  for (;;) {
    const auto table = specfun::bessel_zeros(resonance, want);
    if (table.zeros.back() * table.zeros.back() / (2.0 * h) > m_ceiling) {
      for (double j : table.zeros) {
        const double m = j * j / (2.0 * h);
        if (m > m_ceiling) break;
        part.quantum.push_back(m);
        part.quantum_floor.push_back(static_cast<long>(std::floor(m)));
        part.quantum_ceil.push_back(static_cast<long>(std::ceil(m)));
        part.classical.push_back(j);
      }
      return part;
    }
    want *= 2;
  }
}

std::optional<double> m_max_extent(const ModelParams& params) {
  if (params.detuning == 0.0) return std::nullopt;
  return (params.epsilon * params.resonance) / (params.h * std::abs(params.detuning));
}

}  // namespace ionloc
