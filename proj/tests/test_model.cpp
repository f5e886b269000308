#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ionloc/errors.hpp"
#include "ionloc/model.hpp"
#include "ionloc/specfun.hpp"
#include "oracles.hpp"

using namespace ionloc;

TEST_CASE("model parameters") {
  ModelParams p{0.2, 0.02, 2, 0.001};
  CHECK(p.mu() == doctest::Approx(2.001));
  CHECK(p.period() == doctest::Approx(2.0 * std::numbers::pi / 2.001));
  CHECK(p.quasienergy_zone() == doctest::Approx(0.4002));
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS_AS((ModelParams{0.0, 0.02, 2, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((ModelParams{0.2, -1.0, 2, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((ModelParams{0.2, 0.02, 0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((ModelParams{0.2, 0.02, 2, 0.5}.validate()), ConfigError);
}

TEST_CASE("matrix element closed forms") {
  for (double h : {0.05, 0.2, 1.0}) {
    CHECK(matrix_element_exact(0, 0, h).real() == doctest::Approx(std::exp(-h / 4)));
  }
  const cplx f01 = matrix_element_exact(0, 1, 0.2);
  CHECK(f01.real() == doctest::Approx(0.0));
  CHECK(f01.imag() == doctest::Approx(std::sqrt(0.1) * std::exp(-0.05)).epsilon(1e-14));
  CHECK(f01.imag() == doctest::Approx(0.3008048).epsilon(1e-6));
  CHECK(std::abs(matrix_element_exact(7, 3, 0.2) - matrix_element_exact(3, 7, 0.2)) == 0.0);
  CHECK_THROWS_AS(matrix_element_exact(-1, 0, 0.2), ConfigError);
}

TEST_CASE("matrix elements agree with quadrature over Hermite functions") {
  for (double h : {0.2, 0.7}) {
    for (int m = 0; m <= 10; ++m) {
      for (int mp = 0; mp <= 10; ++mp) {
        const cplx ref = oracle::matrix_element_quadrature(m, mp, h);
        INFO("h=" << h << " m=" << m << " mp=" << mp);
        CHECK(std::abs(matrix_element_exact(m, mp, h) - ref) < 1e-8);
      }
    }
  }
}

TEST_CASE("asymptotic matrix elements") {
  const double h = 0.2;
  for (int m : {1, 10, 300}) {
    const cplx f = matrix_element_asymptotic(m, 0, h);
    CHECK(f.real() ==
          doctest::Approx(std::exp(-h / 4) * specfun::bessel_j(0, std::sqrt(2.0 * m * h))));
  }
  auto rel = [&](int m) {
    const cplx e = matrix_element_exact(m, m + 2, h);
    return std::abs(matrix_element_asymptotic(m, 2, h) - e) / std::abs(e);
  };
  // The Bessel form carries e^{-h/4} on top of the large-m limit of the
  // Laguerre expression, so the deviation shrinks towards 1 - e^{-h/4}.
  const double floor = 1.0 - std::exp(-h / 4);
  CHECK(rel(1000) < rel(100));
  CHECK(rel(100) < 0.1);
  for (int m : {1000, 3000, 10000, 20000}) {
    INFO("m=" << m);
    CHECK(std::abs(rel(m) - floor) < 0.01);
    const cplx e = matrix_element_exact(m, m + 2, h);
    CHECK(std::abs(std::exp(h / 4) * matrix_element_asymptotic(m, 2, h) - e) / std::abs(e) < 0.01);
  }
  for (int m : {100, 1000, 20000}) {
    const cplx e = matrix_element_exact(m, m + 2, h);
    CHECK(std::arg(matrix_element_asymptotic(m, 2, h)) == doctest::Approx(std::arg(e)));
  }
  CHECK_THROWS_AS(matrix_element_asymptotic(0, 2, h), ConfigError);
}

TEST_CASE("coupling table") {
  const double h = 0.2;
  const int m_size = 200;
  const int band = converged_band_width(h, 2, m_size);
  CHECK(band >= default_band_width(h, 2, m_size));
  const CouplingTable t(h, m_size, band, CouplingMode::exact);
  CHECK(t.max_dropped() < 1e-12);
  CHECK_NOTHROW(t.check_tail(1e-12));

  SUBCASE("row zero closed form") {
    for (int n = 0; n <= band; ++n) {
      const double ref = std::exp(0.5 * n * std::log(h / 2) - h / 4 - 0.5 * std::lgamma(n + 1.0));
      CHECK(t.real_part(0, n) == doctest::Approx(ref).epsilon(1e-13));
    }
  }
  SUBCASE("entries match matrix_element_exact and the band is zero outside") {
    for (int m = 0; m < m_size; m += 7) {
      for (int mp = 0; mp < m_size; mp += 3) {
        const cplx ref = std::abs(m - mp) <= band ? matrix_element_exact(m, mp, h) : cplx{};
        CHECK(std::abs(t(m, mp) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
      }
    }
  }
  SUBCASE("rows of a unitary operator have unit norm away from the edge") {
    for (int m : {0, 10, 50, 100}) {
      double sum = 0.0;
      for (int mp = 0; mp < m_size; ++mp) sum += std::norm(t(m, mp));
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  SUBCASE("table does not depend on epsilon") {
    const auto a = build_coupling_table({h, 0.02, 2, 0.0}, 60, 12);
    const auto b = build_coupling_table({h, 3.0, 2, 0.0}, 60, 12);
    for (int m = 0; m < 60; ++m) {
      for (int n = 0; n <= 12 && m + n < 60; ++n) CHECK(a.real_part(m, n) == b.real_part(m, n));
    }
  }
  SUBCASE("csv export") {
    const CouplingTable small(h, 4, 1, CouplingMode::exact);
    std::ostringstream os;
    small.write_csv(os);
    const std::string s = os.str();
    CHECK(s.rfind("m,mp,re,im\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 10);
  }
}

TEST_CASE("asymptotic table keeps the exact m = 0 row") {
  const CouplingTable t(0.2, 50, 6, CouplingMode::asymptotic);
  for (int n = 0; n <= 6; ++n) {
    CHECK(t.real_part(0, n) == doctest::Approx(std::abs(matrix_element_exact(0, n, 0.2))));
  }
  CHECK(std::abs(t(30, 32) - matrix_element_asymptotic(30, 2, 0.2)) < 1e-14);
}

TEST_CASE("tail check reports a too narrow band") {
  const CouplingTable t(0.2, 300, 2, CouplingMode::exact);
  CHECK(t.max_dropped() > 1e-3);
  CHECK_THROWS_AS(t.check_tail(1e-12), GateError);
}

TEST_CASE("F_{m,m+2} envelope: nodes at the cell boundaries, decaying peaks") {
  const double h = 0.2;
  const auto part = cell_boundaries(h, 2, 1200);
  REQUIRE(part.count() >= 5);
  std::vector<double> peaks;
  for (int c = 1; c <= 5; ++c) {
    double peak = 0.0;
    for (int m = static_cast<int>(std::ceil(part.lower(c))); m < part.upper(c); ++m) {
      peak = std::max(peak, std::abs(matrix_element_exact(m, m + 2, h)));
    }
    peaks.push_back(peak);
    // near-zero at the boundary compared to the cell's peak
    const int node = static_cast<int>(std::lround(part.upper(c)));
    CHECK(std::abs(matrix_element_exact(node, node + 2, h)) < 0.05 * peak);
  }
  for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i] < peaks[i - 1]);
}

TEST_CASE("cell boundaries") {
  const auto part = cell_boundaries(0.2, 2, 1200);
  REQUIRE(part.count() >= 2);
  CHECK(part.upper(1) == doctest::Approx(65.94).epsilon(1e-3));
  CHECK(part.upper(2) == doctest::Approx(177.12).epsilon(1e-3));
  CHECK(part.quantum_floor[0] == 65);
  CHECK(part.quantum_ceil[1] == 178);
  CHECK(part.classical[0] == doctest::Approx(5.135622302).epsilon(1e-9));

  const auto doubled = cell_boundaries(0.4, 2, 1200);
  for (int i = 1; i <= doubled.count() && i <= part.count(); ++i) {
    CHECK(doubled.upper(i) == doctest::Approx(part.upper(i) / 2));
    CHECK(doubled.classical[i - 1] == doctest::Approx(part.classical[i - 1]));
  }

  CHECK(part.cell_of(0) == 1);
  CHECK(part.cell_of(30) == 1);
  CHECK(part.cell_of(part.upper(1)) == 1);  // ties go to the lower cell
  CHECK(part.cell_of(66) == 2);
  CHECK(part.cell_of(5000) == part.count() + 1);
  CHECK(part.cell_of_amplitude(5.0) == 1);
  CHECK(part.cell_of_amplitude(6.0) == 2);

  CHECK(cell_boundaries(0.2, 2, 10).count() == 0);
}

TEST_CASE("detuning extent") {
  CHECK(m_max_extent({0.2, 0.02, 2, 0.001}).value() == 200.0);
  CHECK(m_max_extent({0.2, 0.0, 2, 0.001}).value() == 0.0);
  CHECK(m_max_extent({0.2, 0.02, 2, 0.002}).value() == doctest::Approx(100.0));
  CHECK_FALSE(m_max_extent({0.2, 0.02, 2, 0.0}).has_value());
}
