#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ionloc/classical.hpp"
#include "ionloc/errors.hpp"

using namespace ionloc;

namespace {

const double kPi = std::numbers::pi;

double energy(const PhasePoint& q) { return 0.5 * (q.x * q.x + q.p * q.p); }

}  // namespace

TEST_CASE("flow_rhs") {
  const ModelParams p{0.2, 0.7, 2, 0.001};
  const auto f = flow_rhs({1.2, -0.4, 0.3}, p);
  CHECK(f[0] == -0.4);
  CHECK(f[1] == doctest::Approx(-1.2 + 0.7 * std::sin(1.2 - p.mu() * 0.3)));
  // no drive force at the resonant phase X = mu tau
  const auto g = flow_rhs({p.mu() * 0.8, 2.0, 0.8}, p);
  CHECK(g[1] == doctest::Approx(-p.mu() * 0.8));
}

TEST_CASE("angle-action coordinates") {
  auto a = to_angle_action({0.0, 2.0, 0.0}, 2);
  CHECK(a.amplitude == 2.0);
  CHECK(a.action == 2.0);
  CHECK(a.angle == 0.0);
  a = to_angle_action({2.0, 0.0, 0.0}, 2);
  CHECK(a.angle == doctest::Approx(kPi / 2));
  CHECK(a.folded == doctest::Approx(kPi));
  a = to_angle_action({0.0, 0.0, 0.0}, 2);
  CHECK(a.amplitude == 0.0);
  CHECK(a.angle == 0.0);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    const PhasePoint q{u(rng), u(rng), 0.0};
    const auto aa = to_angle_action(q, 3);
    CHECK(aa.angle >= 0.0);
    CHECK(aa.angle < 2 * kPi);
    CHECK(aa.folded >= 0.0);
    CHECK(aa.folded < 2 * kPi);
    CHECK(aa.amplitude * aa.amplitude == doctest::Approx(2 * aa.action));
    const auto back = from_angle_action(aa.amplitude, aa.angle);
    CHECK(std::abs(back.x - q.x) < 1e-12);
    CHECK(std::abs(back.p - q.p) < 1e-12);
  }
}

TEST_CASE("undriven oscillator") {
  const ModelParams p{0.2, 0.0, 2, 0.0};
  SUBCASE("energy is conserved over 1000 periods") {
    // drift grows linearly with the period count; 1e-11 leaves ~6e-9
    const PhasePoint start{1.1, -2.3, 0.0};
    const auto tr = integrate_trajectory(start, 1000, p, 1e-13);
    REQUIRE(tr.samples.size() == 1001);
    double worst = 0.0;
    for (const auto& s : tr.samples) worst = std::max(worst, std::abs(s.action - energy(start)));
    CHECK(worst < 1e-10);
  }
  SUBCASE("flow over 2 pi is the identity") {
    for (const PhasePoint q : {PhasePoint{3.0, 0.0, 0.0}, PhasePoint{-0.5, 4.0, 1.0}}) {
      const auto r = advance(q, q.tau + 2 * kPi, p);
      CHECK(std::abs(r.x - q.x) < 1e-10);
      CHECK(std::abs(r.p - q.p) < 1e-10);
      CHECK(r.tau == q.tau + 2 * kPi);
    }
  }
  SUBCASE("start (3, 0): constant amplitude, folded angle advancing by N T") {
    const auto tr = integrate_trajectory({3.0, 0.0, 0.0}, 20, p);
    for (std::size_t s = 0; s < tr.samples.size(); ++s) {
      CHECK(tr.samples[s].amplitude == doctest::Approx(3.0).epsilon(1e-10));
      // angle(tau) = pi/2 + tau
      const double expected = 2 * (kPi / 2 + s * p.period());
      CHECK(std::abs(std::remainder(tr.samples[s].folded - expected, 2 * kPi)) < 1e-9);
    }
  }
}

TEST_CASE("one-period map preserves area") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (double eps : {0.02, 3.0}) {
    const ModelParams p{0.2, eps, 2, 0.0};
    for (int k = 0; k < 20; ++k) {
      const PhasePoint q{u(rng), u(rng), 0.0};
      INFO("eps=" << eps << " x=" << q.x << " p=" << q.p);
      CHECK(std::abs(stroboscopic_jacobian(q, p) - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("time reversal") {
  SUBCASE("weak drive, 100 periods") {
    const ModelParams p{0.2, 0.02, 2, 0.0};
    const PhasePoint q{2.0, 3.0, 0.0};
    const auto there = advance(q, 100 * p.period(), p);
    const auto back = advance(there, 0.0, p);
    CHECK(std::abs(back.x - q.x) < 1e-8);
    CHECK(std::abs(back.p - q.p) < 1e-8);
  }
  SUBCASE("strong drive, 5 periods") {
    const ModelParams p{0.2, 3.0, 2, 0.0};
    const PhasePoint q{2.0, 3.0, 0.0};
    const auto there = advance(q, 5 * p.period(), p);
    const auto back = advance(there, 0.0, p);
    CHECK(std::abs(back.x - q.x) < 1e-8);
    CHECK(std::abs(back.p - q.p) < 1e-8);
  }
}

TEST_CASE("sections") {
  const auto part = cell_boundaries(0.2, 2, 1200);
  SUBCASE("seeding") {
    const auto seeds = seed_cells(part, 3, 4, 5);
    REQUIRE(seeds.size() == 60);
    for (int c = 1; c <= 3; ++c) {
      for (int k = 0; k < 20; ++k) {
        const auto a = to_angle_action(seeds[(c - 1) * 20 + k], 2);
        CHECK(part.cell_of_amplitude(a.amplitude) == c);
      }
    }
    CHECK_THROWS_AS(seed_cells(part, part.count() + 1, 4, 5), ConfigError);
  }
  SUBCASE("samples sit at whole periods") {
    const ModelParams p{0.2, 0.02, 2, 0.0};
    const auto sec = stroboscopic_section(p, seed_cells(part, 1, 2, 2), 10);
    REQUIRE(sec.trajectories.size() == 4);
    const auto& tr = sec.trajectories[3];
    CHECK(tr.id == 3);
    const auto direct = advance(tr.start, 7 * p.period(), p);
    const auto a = to_angle_action(direct, 2);
    CHECK(tr.samples[7].amplitude == doctest::Approx(a.amplitude).epsilon(1e-9));
    CHECK(tr.samples[7].angle == doctest::Approx(a.angle).epsilon(1e-9));
    CHECK_THROWS_AS(integrate_trajectory(tr.start, 0, p), ConfigError);
  }
}

TEST_CASE("weak drive confines cell-1 islands") {
  const ModelParams p{0.2, 0.02, 2, 0.0};
  const auto part = cell_boundaries(p.h, 2, 200);
  const auto sec = stroboscopic_section(p, seed_cells(part, 1, 4, 4), 300);
  for (const auto& tr : sec.trajectories) {
    for (const auto& s : tr.samples) CHECK(s.amplitude < part.upper_kr(1));
  }
}

TEST_CASE("detuned drive") {
  const ModelParams p{0.2, 0.02, 2, 0.001};
  const auto part = cell_boundaries(p.h, 2, 1200);
  const int periods = 1000;
  SUBCASE("amplitudes beyond the second cell barely drift") {
    std::vector<PhasePoint> seeds;
    for (int c = 3; c <= 5; ++c) {
      const double kr = 0.5 * (part.lower_kr(c) + part.upper_kr(c));
      for (int b = 0; b < 4; ++b) seeds.push_back(from_angle_action(kr, 0.5 * kPi * b));
    }
    const auto sec = stroboscopic_section(p, seeds, periods);
    for (std::size_t k = 0; k < sec.trajectories.size(); ++k) {
      const int c = 3 + static_cast<int>(k / 4);
      const double spacing = part.upper_kr(c) - part.lower_kr(c);
      const double kr0 = sec.trajectories[k].samples.front().amplitude;
      double drift = 0.0;
      for (const auto& s : sec.trajectories[k].samples) drift = std::max(drift, std::abs(s.amplitude - kr0));
      CHECK(drift < spacing);
    }
  }
  SUBCASE("cell-1 islands persist") {
    std::vector<PhasePoint> seeds;
    for (double kr : {2.0, 3.0, 4.0}) {
      for (int b = 0; b < 4; ++b) seeds.push_back(from_angle_action(kr, 0.5 * kPi * b));
    }
    const auto sec = stroboscopic_section(p, seeds, periods);
    for (const auto& tr : sec.trajectories) {
      for (const auto& s : tr.samples) CHECK(s.amplitude < part.upper_kr(1));
    }
  }
}

TEST_CASE("cell map") {
  CellMapOptions o;
  o.amplitudes_per_cell = 2;
  o.angles = 2;
  o.periods = 20;
  const auto a = classical_cell_map({0.2, 0.02, 2, 0.0}, 12.0, o);
  const auto b = classical_cell_map({0.2, 3.0, 2, 0.001}, 12.0, o);
  REQUIRE(a.size() == 3);
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].cell == static_cast<int>(i) + 1);
    CHECK(a[i].kr_upper == b[i].kr_upper);
    CHECK(a[i].kr_lower == b[i].kr_lower);
    CHECK(a[i].probes == 4);
  }
  CHECK(a[0].kr_upper == doctest::Approx(5.135622302));
  CHECK(a[2].kr_upper == doctest::Approx(11.61984117));
  CHECK(a[0].leave_fraction == 0.0);
  CHECK_THROWS_AS(classical_cell_map({0.2, 0.02, 2, 0.0}, 5.0, o), ConfigError);

  const auto part = cell_boundaries(0.2, 2, 400);
  const auto sec = stroboscopic_section({0.2, 0.02, 2, 0.0}, seed_cells(part, 2, 2, 2), 5);
  CHECK_THROWS_AS(cell_leave_fractions(sec, part, 3, 4), ConfigError);
}
