#include "ionloc/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ionloc/errors.hpp"
#include "ionloc/specfun.hpp"
#include "ode.hpp"

namespace ionloc {

namespace {

constexpr int kColumnBlock = 32;
constexpr double kUnitarityGate = 1e-6;

cplx i_power(int n) {
  switch (n & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// Generator of the amplitude equations in the frame rotating with the
// unperturbed oscillator, anchored at tau0:
//   c_m(tau) = e^{-i(m+1/2)(tau-tau0)} b_m(tau),  db/ds = B(s) b,  s = tau - tau0,
//   B_{m,m+n}(s) = f_{min(m,m+n),|n|} g_n(s),
//   g_n(s) = -(i eps/2h) e^{-ins} (i^|n| e^{-i mu tau} + (-i)^|n| e^{i mu tau}).
// State layout: real parts then imaginary parts, each row-major M x K.
class RotatingFrameGenerator {
 public:
  RotatingFrameGenerator(const ModelParams& params, const CouplingTable& table, int columns,
                         double tau0)
      : params_(params),
        table_(table),
        rows_(table.basis_size()),
        cols_(columns),
        band_(table.band_width()),
        tau0_(tau0),
        phases_(2 * band_ + 1) {}

  void operator()(const detail::OdeState& x, detail::OdeState& dxdt, double s) const {
    const double tau = tau0_ + s;
    const double scale = params_.epsilon / (2.0 * params_.h);
    const cplx drive_minus = std::polar(1.0, -params_.mu() * tau);
    const cplx drive_plus = std::conj(drive_minus);
    for (int n = -band_; n <= band_; ++n) {
      const int a = std::abs(n);
      const cplx bracket = i_power(a) * drive_minus + i_power(4 - a % 4) * drive_plus;
      phases_[n + band_] = cplx(0.0, -scale) * std::polar(1.0, -n * s) * bracket;
    }

    const std::size_t block = static_cast<std::size_t>(rows_) * cols_;
    const double* xr = x.data();
    const double* xi = x.data() + block;
    double* yr = dxdt.data();
    double* yi = dxdt.data() + block;
    std::fill(dxdt.begin(), dxdt.end(), 0.0);
    if (params_.epsilon == 0.0) return;

    for (int m = 0; m < rows_; ++m) {
      double* out_r = yr + static_cast<std::size_t>(m) * cols_;
      double* out_i = yi + static_cast<std::size_t>(m) * cols_;
      const int n_lo = std::max(-band_, -m);
      const int n_hi = std::min(band_, rows_ - 1 - m);
      for (int n = n_lo; n <= n_hi; ++n) {
        const double f = table_.real_part(n < 0 ? m + n : m, std::abs(n));
        const cplx coef = f * phases_[n + band_];
        const double cr = coef.real();
        const double ci = coef.imag();
        const double* in_r = xr + static_cast<std::size_t>(m + n) * cols_;
        const double* in_i = xi + static_cast<std::size_t>(m + n) * cols_;
        for (int j = 0; j < cols_; ++j) {
          out_r[j] += cr * in_r[j] - ci * in_i[j];
          out_i[j] += cr * in_i[j] + ci * in_r[j];
        }
      }
    }
  }

 private:
  const ModelParams& params_;
  const CouplingTable& table_;
  int rows_;
  int cols_;
  int band_;
  double tau0_;
  mutable std::vector<cplx> phases_;
};

detail::OdeState pack(std::span<const cplx> c) {
  detail::OdeState x(2 * c.size());
  for (std::size_t m = 0; m < c.size(); ++m) {
    x[m] = c[m].real();
    x[c.size() + m] = c[m].imag();
  }
  return x;
}

// Rotates rotating-frame amplitudes of one column back to the lab frame.
cplx lab_amplitude(const detail::OdeState& x, int m, int j, int rows, int cols, double elapsed) {
  const std::size_t block = static_cast<std::size_t>(rows) * cols;
  const std::size_t at = static_cast<std::size_t>(m) * cols + j;
  return std::polar(1.0, -(m + 0.5) * elapsed) * cplx(x[at], x[block + at]);
}

// Reduces tau to [0, T) so that drive phases keep full precision.
double reduce_to_period(double tau, double period) {
  const double r = std::fmod(tau, period);
  return r < 0.0 ? r + period : r;
}

}  // namespace

FockState FockState::basis(int basis_size, int m, double time) {
  if (m < 0 || m >= basis_size) throw ConfigError("basis state lies outside the basis");
  FockState s;
  s.amplitudes.assign(basis_size, 0.0);
  s.amplitudes[m] = 1.0;
  s.time = time;
  return s;
}

double FockState::norm_squared() const {
  double n = 0.0;
  for (const auto& a : amplitudes) n += std::norm(a);
  return n;
}

double tail_mass(std::span<const cplx> amplitudes, double fraction) {
  const double edge = fraction * static_cast<double>(amplitudes.size());
  double mass = 0.0;
  for (std::size_t m = 0; m < amplitudes.size(); ++m) {
    if (static_cast<double>(m) > edge) mass += std::norm(amplitudes[m]);
  }
  return mass;
}

void schrodinger_rhs(std::span<const cplx> amplitudes, double tau, const ModelParams& params,
                     const CouplingTable& table, std::span<cplx> derivative) {
  const int rows = table.basis_size();
  if (static_cast<int>(amplitudes.size()) != rows || derivative.size() != amplitudes.size()) {
    throw ConfigError("schrodinger_rhs: amplitude count does not match the coupling table");
  }
  const int band = table.band_width();
  const cplx drive_minus = std::polar(1.0, -params.mu() * tau);
  const cplx drive_plus = std::conj(drive_minus);
  const cplx minus_i_over_h(0.0, -1.0 / params.h);
  for (int m = 0; m < rows; ++m) {
    cplx acc = params.h * (m + 0.5) * amplitudes[m];
    cplx coupling = 0.0;
    for (int mp = std::max(0, m - band); mp <= std::min(rows - 1, m + band); ++mp) {
      const cplx f = table(m, mp);
      coupling += (drive_minus * f + drive_plus * std::conj(f)) * amplitudes[mp];
    }
    acc += 0.5 * params.epsilon * coupling;
    derivative[m] = minus_i_over_h * acc;
  }
}

FockState propagate(const FockState& state, double tau_to, const ModelParams& params,
                    const CouplingTable& table, const PropagationOptions& options,
                    PropagationReport* report) {
  const int rows = table.basis_size();
  if (static_cast<int>(state.amplitudes.size()) != rows) {
    throw ConfigError("propagate: state size does not match the coupling table");
  }
  if (tau_to < state.time) throw ConfigError("propagate: tau_to must not precede the state time");

  const double elapsed = tau_to - state.time;
  const double start_norm = state.norm_squared();
  RotatingFrameGenerator gen(params, table, 1, reduce_to_period(state.time, params.period()));
  auto x = pack(state.amplitudes);

  PropagationReport local;
  local.max_tail_mass = tail_mass(state.amplitudes, options.tail_fraction);
  const double edge = options.tail_fraction * rows;
  auto observe = [&](const detail::OdeState& y, double s) {
    double mass = 0.0;
    for (int m = 0; m < rows; ++m) {
      if (m > edge) mass += y[m] * y[m] + y[rows + m] * y[rows + m];
    }
    local.max_tail_mass = std::max(local.max_tail_mass, mass);
    if (mass > options.tail_tolerance && !local.tail_breach_time) {
      local.tail_breach_time = state.time + s;
    }
  };
  local.stats = detail::integrate_adaptive(gen, x, 0.0, elapsed, options.tolerance,
                                           std::min(0.05, std::max(elapsed, 1e-3)), observe);

  FockState out;
  out.time = tau_to;
  out.amplitudes.resize(rows);
  for (int m = 0; m < rows; ++m) out.amplitudes[m] = lab_amplitude(x, m, 0, rows, 1, elapsed);
  const double end_norm = out.norm_squared();
  local.norm_drift = std::abs(end_norm - start_norm);
  if (options.renormalize && end_norm > 0.0) {
    const double s = std::sqrt(start_norm / end_norm);
    for (auto& a : out.amplitudes) a *= s;
  }
  if (report != nullptr) *report = local;
  return out;
}

double unitarity_residual(const Eigen::MatrixXcd& u) {
  const Eigen::MatrixXcd g = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return g.cwiseAbs().maxCoeff();
}

FloquetOperator build_floquet_operator(const ModelParams& params, const CouplingTable& table,
                                       const PropagationOptions& options) {
  params.validate();
  const int rows = table.basis_size();
  const double period = params.period();
  const int blocks = (rows + kColumnBlock - 1) / kColumnBlock;

  FloquetOperator op;
  op.params = params;
  op.band_width = table.band_width();
  op.max_dropped_coupling = table.max_dropped();
  op.matrix.resize(rows, rows);
  std::vector<IntegratorStats> block_stats(blocks);
  std::vector<std::string> failures(blocks);

#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < blocks; ++b) {
    try {
      const int first = b * kColumnBlock;
      const int cols = std::min(kColumnBlock, rows - first);
      RotatingFrameGenerator gen(params, table, cols, 0.0);
      detail::OdeState x(2 * static_cast<std::size_t>(rows) * cols, 0.0);
      for (int j = 0; j < cols; ++j) x[static_cast<std::size_t>(first + j) * cols + j] = 1.0;
      block_stats[b] = detail::integrate_adaptive(gen, x, 0.0, period, options.tolerance, 0.02);
      for (int j = 0; j < cols; ++j) {
        for (int m = 0; m < rows; ++m) {
          op.matrix(m, first + j) = lab_amplitude(x, m, j, rows, cols, period);
        }
      }
    } catch (const std::exception& e) {
      failures[b] = e.what();
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw NumericalError("floquet operator: " + f);
  }
  for (const auto& s : block_stats) op.stats += s;

  op.unitarity_residual = unitarity_residual(op.matrix);
  if (op.unitarity_residual > kUnitarityGate) {
    std::ostringstream msg;
    msg << "U(T) unitarity residual " << op.unitarity_residual << " exceeds " << kUnitarityGate;
    throw GateError(msg.str());
  }
  return op;
}

FloquetOperator build_floquet_operator(const ModelParams& params, int basis_size,
                                       double tolerance) {
  const int band = converged_band_width(params.h, params.resonance, basis_size);
  const auto table = build_coupling_table(params, basis_size, band);
  PropagationOptions options;
  options.tolerance = tolerance;
  return build_floquet_operator(params, table, options);
}

int default_basis_size(const ModelParams& params, int analysed_cells) {
  if (analysed_cells < 1) throw ConfigError("at least one analysed cell is required");
  const double j = specfun::bessel_zeros(params.resonance, analysed_cells).zeros.back();
  return static_cast<int>(std::ceil(1.5 * j * j / (2.0 * params.h)));
}

double quasienergy_of(cplx eigenvalue, const ModelParams& params) {
  const double zone = params.quasienergy_zone();
  double sigma = -params.h * std::arg(eigenvalue) / params.period();
  sigma = std::fmod(sigma, zone);
  if (sigma < 0.0) sigma += zone;
  if (sigma >= zone) sigma -= zone;
  return sigma;
}

double circular_distance(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

FloquetSpectrum quasienergy_spectrum(const FloquetOperator& op, double cluster_tolerance) {
  const Eigen::MatrixXcd& u = op.matrix;
  const int rows = op.basis_size();
  if (op.unitarity_residual > kUnitarityGate || unitarity_residual(u) > kUnitarityGate) {
    throw GateError("quasienergy_spectrum: U(T) is not unitary to 1e-6");
  }
  const Eigen::MatrixXcd cos_part = 0.5 * (u + u.adjoint());
  const Eigen::MatrixXcd sin_part = cplx(0.0, -0.5) * (u - u.adjoint());

  // Joint diagonalization of the commuting pair. Each pass diagonalizes both
  // members restricted to an invariant subspace and splits it at the widest
  // eigenvalue gaps of whichever member separates it better, so eigenvalues
  // that coincide in one member (phases phi and -phi share a cosine) are
  // split by the other.
  std::vector<Eigen::VectorXcd> vectors;
  vectors.reserve(rows);
  std::vector<Eigen::MatrixXcd> pending;
  pending.push_back(Eigen::MatrixXcd::Identity(rows, rows));
  while (!pending.empty()) {
    Eigen::MatrixXcd basis = std::move(pending.back());
    pending.pop_back();
    const int k = static_cast<int>(basis.cols());
    if (k == 1) {
      vectors.push_back(basis.col(0));
      continue;
    }
    Eigen::MatrixXcd c_small = basis.adjoint() * cos_part * basis;
    Eigen::MatrixXcd s_small = basis.adjoint() * sin_part * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> by_cos(0.5 * (c_small + c_small.adjoint()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> by_sin(0.5 * (s_small + s_small.adjoint()));
    if (by_cos.info() != Eigen::Success || by_sin.info() != Eigen::Success) {
      throw NumericalError("Hermitian eigensolver failed while resolving U(T)");
    }
    auto widest_gap = [](const Eigen::VectorXd& v) {
      double g = 0.0;
      for (Eigen::Index i = 1; i < v.size(); ++i) g = std::max(g, v(i) - v(i - 1));
      return g;
    };
    const double gap_cos = widest_gap(by_cos.eigenvalues());
    const double gap_sin = widest_gap(by_sin.eigenvalues());
    if (std::max(gap_cos, gap_sin) < cluster_tolerance) {
      // Degenerate to working precision: any orthonormal basis will do.
      for (int j = 0; j < k; ++j) vectors.push_back(basis.col(j));
      continue;
    }
    const auto& chosen = gap_cos >= gap_sin ? by_cos : by_sin;
    const Eigen::VectorXd& vals = chosen.eigenvalues();
    const Eigen::MatrixXcd rotated = basis * chosen.eigenvectors();
    const double split = std::max(cluster_tolerance, 0.25 * std::max(gap_cos, gap_sin));
    int first = 0;
    for (int j = 1; j <= k; ++j) {
      if (j == k || vals(j) - vals(j - 1) > split) {
        pending.push_back(rotated.middleCols(first, j - first));
        first = j;
      }
    }
  }

  FloquetSpectrum out;
  out.sites.resize(rows);
  std::iota(out.sites.begin(), out.sites.end(), 0L);
  out.states.resize(rows);
  for (int k = 0; k < rows; ++k) {
    Eigen::VectorXcd v = vectors[k];
    v.normalize();
    const Eigen::VectorXcd uv = u * v;
    const cplx lambda = v.dot(uv);
    out.max_residual = std::max(out.max_residual, (uv - lambda * v).norm());
    int peak = 0;
    v.cwiseAbs2().maxCoeff(&peak);
    v *= std::abs(v(peak)) / v(peak);

    auto& st = out.states[k];
    st.quasienergy = quasienergy_of(lambda, op.params);
    st.amplitudes.assign(v.data(), v.data() + rows);
    const auto mom = eigenstate_stats(std::span<const cplx>(st.amplitudes),
                                      std::span<const long>(out.sites));
    st.mean = mom.mean;
    st.spread = mom.spread;
  }
  if (out.max_residual > 1e-6) {
    std::ostringstream msg;
    msg << "quasienergy_spectrum: eigenpair residual " << out.max_residual;
    throw NumericalError(msg.str());
  }
  std::stable_sort(out.states.begin(), out.states.end(),
                   [](const QuasienergyState& a, const QuasienergyState& b) {
                     return a.mean < b.mean;
                   });
  return out;
}

TimeAverage time_averaged_distribution(const FloquetOperator& op, const CouplingTable& table,
                                       int m0, double warmup, double window_end, int samples,
                                       const PropagationOptions& options) {
  const int rows = op.basis_size();
  if (samples < 1) throw ConfigError("time average needs at least one sample");
  if (!(warmup < window_end)) throw ConfigError("time average window must satisfy warmup < end");
  if (warmup < 0.0) throw ConfigError("time average window must start at tau >= 0");
  if (m0 < 0 || m0 >= rows) throw ConfigError("initial state lies outside the basis");
  if (table.basis_size() != rows) throw ConfigError("coupling table does not match U(T)");

  const double period = op.params.period();
  TimeAverage out;
  out.probability.assign(rows, 0.0);
  Eigen::VectorXcd strobe = Eigen::VectorXcd::Zero(rows);
  strobe(m0) = 1.0;
  long strobe_index = 0;
  std::vector<Eigen::MatrixXcd> powers{op.matrix};

  for (int k = 0; k < samples; ++k) {
    const double tau =
        samples == 1 ? warmup : warmup + (window_end - warmup) * k / (samples - 1.0);
    out.sample_times.push_back(tau);
    const long target = static_cast<long>(std::floor(tau / period));
    // Whole periods by binary powers U^(2^j), built on demand.
    for (long gap = target - strobe_index, j = 0; gap > 0; gap >>= 1, ++j) {
      if (j == static_cast<long>(powers.size())) powers.push_back(powers.back() * powers.back());
      if (gap & 1) strobe = (powers[j] * strobe).eval();
    }
    strobe_index = target;

    FockState at_strobe;
    at_strobe.amplitudes.assign(strobe.data(), strobe.data() + rows);
    at_strobe.time = 0.0;  // the drive is periodic; only the phase within a period matters
    const double fraction = tau - static_cast<double>(target) * period;
    PropagationReport report;
    const FockState now =
        fraction > 0.0 ? propagate(at_strobe, fraction, op.params, table, options, &report)
                       : at_strobe;
    out.stats += report.stats;
    const double mass = tail_mass(now.amplitudes, options.tail_fraction);
    out.max_tail_mass = std::max(out.max_tail_mass, mass);
    if (mass > options.tail_tolerance && !out.tail_breach_time) out.tail_breach_time = tau;
    for (int m = 0; m < rows; ++m) out.probability[m] += std::norm(now.amplitudes[m]);
  }
  for (auto& p : out.probability) p /= samples;
  return out;
}

std::vector<double> Lattice2DSpectrum::fock_profile(int k) const {
  std::vector<double> out(basis_size, 0.0);
  for (int l = -l_max; l <= l_max; ++l) {
    for (int m = 0; m < basis_size; ++m) out[m] += std::norm(vectors(index(m, l), k));
  }
  return out;
}

double Lattice2DSpectrum::edge_weight(int k, int depth) const {
  double w = 0.0;
  for (int l = -l_max; l <= l_max; ++l) {
    if (std::abs(l) <= l_max - depth) continue;
    for (int m = 0; m < basis_size; ++m) w += std::norm(vectors(index(m, l), k));
  }
  return w;
}

Eigen::MatrixXcd lattice2d_hamiltonian(const ModelParams& params, const CouplingTable& table,
                                       int l_max) {
  if (l_max < 1) throw ConfigError("lattice needs L >= 1");
  const int rows = table.basis_size();
  const int band = table.band_width();
  const int dim = rows * (2 * l_max + 1);
  auto idx = [&](int m, int l) { return (l + l_max) * rows + m; };
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const double half_eps = 0.5 * params.epsilon;
  for (int l = -l_max; l <= l_max; ++l) {
    for (int m = 0; m < rows; ++m) {
      h(idx(m, l), idx(m, l)) = params.h * (m - params.mu() * l);
      if (l == l_max || params.epsilon == 0.0) continue;
      for (int mp = std::max(0, m - band); mp <= std::min(rows - 1, m + band); ++mp) {
        const cplx f = half_eps * table(m, mp);
        h(idx(m, l), idx(mp, l + 1)) = f;
        h(idx(mp, l + 1), idx(m, l)) = std::conj(f);
      }
    }
  }
  return h;
}

Lattice2DSpectrum lattice2d_eigenproblem(const ModelParams& params, const CouplingTable& table,
                                         int l_max, bool with_vectors, int dimension_cap) {
  params.validate();
  const long dim = static_cast<long>(table.basis_size()) * (2L * l_max + 1);
  if (dim > dimension_cap) {
    std::ostringstream msg;
    msg << "lattice dimension " << dim << " exceeds the cap of " << dimension_cap;
    throw NumericalError(msg.str());
  }
  const Eigen::MatrixXcd h = lattice2d_hamiltonian(params, table, l_max);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      h, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("lattice eigensolver failed");
  Lattice2DSpectrum out;
  out.basis_size = table.basis_size();
  out.l_max = l_max;
  out.energies = solver.eigenvalues();
  if (with_vectors) out.vectors = solver.eigenvectors();
  return out;
}

}  // namespace ionloc
