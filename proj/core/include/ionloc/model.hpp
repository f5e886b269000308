#pragma once

#include <complex>
#include <optional>
#include <ostream>
#include <vector>

namespace ionloc {

using cplx = std::complex<double>;

/// Dimensionless constants of the driven oscillator
///   H = -h^2/2 d^2/dX^2 + X^2/2 + eps cos(X - mu tau),  mu = N + delta.
struct ModelParams {
  double h = 0.2;
  double epsilon = 0.02;
  int resonance = 2;  // N
  double detuning = 0.0;  // delta

  double mu() const { return resonance + detuning; }
  double period() const;  // T = 2 pi / mu
  /// Quasienergies are defined modulo h * mu.
  double quasienergy_zone() const { return h * mu(); }

  /// Throws ConfigError unless h > 0, eps >= 0, N >= 1, |delta| < 1/2.
  void validate() const;
};

std::ostream& operator<<(std::ostream& os, const ModelParams& p);

/// <m| e^{iX} |mp> in the oscillator eigenbasis (Laguerre form).
cplx matrix_element_exact(int m, int mp, double h);

/// Large-m Bessel approximation of <m| e^{iX} |m+n>, n >= 0, m >= 1.
cplx matrix_element_asymptotic(int m, int n, double h);

enum class CouplingMode { exact, asymptotic };

/// Banded table of F_{m,m'} = <m|e^{iX}|m'> for m, m' < basis_size and
/// |m - m'| <= band_width. Every entry has the form i^n f with f real,
/// n = |m - m'|, so only f is stored.
class CouplingTable {
 public:
  CouplingTable(double h, int basis_size, int band_width, CouplingMode mode);

  int basis_size() const { return basis_size_; }
  int band_width() const { return band_width_; }
  CouplingMode mode() const { return mode_; }
  double h() const { return h_; }

  /// Real amplitude f of F_{m,m+n} = i^n f for 0 <= n <= band_width.
  double real_part(int m, int n) const {
    return reduced_[static_cast<std::size_t>(m) * (band_width_ + 1) + n];
  }
  /// F_{m,mp}; zero outside the band or the basis.
  cplx operator()(int m, int mp) const;

  /// Largest |F| among the entries just outside the band (the first dropped
  /// diagonals), as a truncation diagnostic.
  double max_dropped() const { return max_dropped_; }

  /// Throws GateError if max_dropped() exceeds `tolerance`.
  void check_tail(double tolerance) const;

  void write_csv(std::ostream& os) const;

 private:
  double h_;
  int basis_size_;
  int band_width_;
  CouplingMode mode_;
  std::vector<double> reduced_;
  double max_dropped_ = 0.0;
};

/// max(3N, ceil(6 sqrt(h M))), clamped to M - 1.
int default_band_width(double h, int resonance, int basis_size);

/// Smallest band width >= default_band_width whose dropped entries are all
/// below `tail_tolerance` (or M - 1 if none is).
int converged_band_width(double h, int resonance, int basis_size, double tail_tolerance = 1e-12);

CouplingTable build_coupling_table(const ModelParams& params, int basis_size, int band_width,
                                   CouplingMode mode = CouplingMode::exact);

/// Resonance-cell boundaries: zeros of J_N(sqrt(2 h m)). Cell i (1-based)
/// is the interval (m_{i-1}, m_i] with m_0 = 0.
struct CellPartition {
  double h = 0.0;
  int resonance = 0;
  std::vector<double> quantum;  // m_i = j_{N,i}^2 / (2h), unrounded
  std::vector<long> quantum_floor;
  std::vector<long> quantum_ceil;
  std::vector<double> classical;  // kr_i = j_{N,i}

  int count() const { return static_cast<int>(quantum.size()); }
  /// 1-based cell holding m (ties go to the lower cell); count() + 1 when m
  /// lies beyond the last resolved boundary.
  int cell_of(double m) const;
  double lower(int cell) const { return cell <= 1 ? 0.0 : quantum[cell - 2]; }
  double upper(int cell) const { return quantum[cell - 1]; }
  double width(int cell) const { return upper(cell) - lower(cell); }
  int cell_of_amplitude(double kr) const;
  double lower_kr(int cell) const { return cell <= 1 ? 0.0 : classical[cell - 2]; }
  double upper_kr(int cell) const { return classical[cell - 1]; }
};

CellPartition cell_boundaries(double h, int resonance, double m_ceiling);

/// Extent eps N / (h delta) of the resonantly coupled region; nullopt when
/// delta = 0 (unbounded).
std::optional<double> m_max_extent(const ModelParams& params);

}  // namespace ionloc
