#include <benchmark/benchmark.h>

#include "detlab/halfline.hpp"
#include "detlab/identity_lab.hpp"
#include "detlab/rng.hpp"

using namespace detlab;

namespace {

void BM_DetIPlus(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.next_complex(0.5 / std::sqrt(double(n)));
  for (auto _ : state) benchmark::DoNotOptimize(det_I_plus(a).value);
}
BENCHMARK(BM_DetIPlus)->Arg(128)->Arg(512)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_HalflineDeterminant(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto well = halfline::square_well(Complex(2, 0), 1.0);
  const SpectralPoint z(Complex(-1, 0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        halfline::bs_determinant_halfline(Bc::Dirichlet, well, z, 30.0, n).value);
}
BENCHMARK(BM_HalflineDeterminant)->Arg(250)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ModalGreen(benchmark::State& state) {
  const auto dom = geom::make_disk(64, static_cast<int>(state.range(0)), 64);
  const SpectralPoint z(Complex(-1, 0));
  for (auto _ : state)
    benchmark::DoNotOptimize(geom::make_modal_green(dom, Bc::Dirichlet, z).per_mode.size());
}
BENCHMARK(BM_ModalGreen)->Arg(8)->Arg(24)->Unit(benchmark::kMillisecond);

pot::FiniteRankPotential bench_potential(const geom::ModalDomain& dom) {
  const pot::FactorSpec psi1{{{0, {Complex(0.9, 0), Complex(0, 0), Complex(-0.9, 0)}},
                              {2, {Complex(0, 0), Complex(0, 0), Complex(0.7, 0),
                                   Complex(-0.7, 0)}}}};
  const pot::FactorSpec psi2{{{1, {Complex(0, 0), Complex(1.1, 0), Complex(-1.1, 0)}}}};
  return pot::make_potential({Complex(0.85, 0), Complex(-0.6, 0)}, {psi1, psi2}, {psi1, psi2},
                             dom);
}

void BM_DeterminantChain(benchmark::State& state) {
  const auto dom = geom::make_disk(static_cast<int>(state.range(0)), 12, 28);
  const auto v = bench_potential(dom);
  const SpectralPoint z(Complex(-1, 0));
  for (auto _ : state)
    benchmark::DoNotOptimize(lab::verify_determinant_chain(dom, v, z).max_residual());
}
BENCHMARK(BM_DeterminantChain)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_NystromOracle(benchmark::State& state) {
  const auto dom = geom::make_disk(48, 8, 20);
  const auto v = bench_potential(dom);
  const SpectralPoint z(Complex(-1, 0));
  lab::NystromParams p;
  p.n_radial = static_cast<int>(state.range(0));
  p.n_theta = 2 * p.n_radial;
  for (auto _ : state)
    benchmark::DoNotOptimize(lab::nystrom_interior_det(dom, Bc::Dirichlet, v, z, p).value);
}
BENCHMARK(BM_NystromOracle)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
