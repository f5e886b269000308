#include <benchmark/benchmark.h>

#include "ionloc/classical.hpp"
#include "ionloc/floquet.hpp"
#include "ionloc/resonance_chain.hpp"

using namespace ionloc;

namespace {

void BM_CouplingTable(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int band = default_band_width(0.2, 2, m);
  for (auto _ : state) {
    CouplingTable t(0.2, m, band, CouplingMode::exact);
    benchmark::DoNotOptimize(t.max_dropped());
  }
}
BENCHMARK(BM_CouplingTable)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_ChainSolve(benchmark::State& state) {
  const ModelParams p{0.2, 0.02, 2, 0.0};
  const auto chain = build_chain(p, 0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto spec = solve_chain(chain);
    benchmark::DoNotOptimize(spec.states.data());
  }
}
BENCHMARK(BM_ChainSolve)->Arg(100)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_SchrodingerRhs(benchmark::State& state) {
  const ModelParams p{0.2, 3.0, 2, 0.0};
  const int m = static_cast<int>(state.range(0));
  const auto t = build_coupling_table(p, m, converged_band_width(p.h, 2, m));
  std::vector<cplx> c(m, cplx(1.0 / std::sqrt(m), 0.0)), d(m);
  double tau = 0.0;
  for (auto _ : state) {
    schrodinger_rhs(c, tau, p, t, d);
    tau += 1e-3;
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_SchrodingerRhs)->Arg(266)->Arg(507);

void BM_FloquetOperator(benchmark::State& state) {
  const ModelParams p{0.2, 0.02, 2, 0.0};
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto u = build_floquet_operator(p, m);
    benchmark::DoNotOptimize(u.unitarity_residual);
  }
}
BENCHMARK(BM_FloquetOperator)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_QuasienergySpectrum(benchmark::State& state) {
  const ModelParams p{0.2, 3.0, 2, 0.0};
  const auto u = build_floquet_operator(p, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto s = quasienergy_spectrum(u);
    benchmark::DoNotOptimize(s.max_residual);
  }
}
BENCHMARK(BM_QuasienergySpectrum)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_ClassicalPeriod(benchmark::State& state) {
  const ModelParams p{0.2, 3.0, 2, 0.0};
  PhasePoint q{3.0, 1.0, 0.0};
  for (auto _ : state) {
    q = advance(q, q.tau + p.period(), p);
    benchmark::DoNotOptimize(q.x);
  }
}
BENCHMARK(BM_ClassicalPeriod)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
