#include <benchmark/benchmark.h>

#include "spmoran/analytic.hpp"
#include "spmoran/diffusion.hpp"
#include "spmoran/oracle.hpp"

using namespace spmoran;

namespace {

void BM_AirySeries(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(airy_ai(x));
    x += 0.37;
    if (x > 7.5) x = 0.0;
  }
}
BENCHMARK(BM_AirySeries);

void BM_DiffusionPath(benchmark::State& state) {
  DiffusionParams p;
  p.d = static_cast<int>(state.range(0));
  p.beta = p.d == 1 ? 0.0 : 0.66;
  p.eps = 0.01;
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream rng(5, rep++);
    benchmark::DoNotOptimize(simulate_path(p, rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DiffusionPath)->Arg(1)->Arg(3);

void BM_OracleManhours(benchmark::State& state) {
  const auto chain = make_size_chain(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(conditioned_manhours_die_solve(chain));
}
BENCHMARK(BM_OracleManhours)->Arg(64)->Arg(256)->Arg(1024);

void BM_NuExact(benchmark::State& state) {
  const auto chain = make_size_chain(1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nu_exact(chain, 1e-6, 20'000));
}
BENCHMARK(BM_NuExact);

}  // namespace
