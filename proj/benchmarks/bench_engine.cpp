#include <benchmark/benchmark.h>

#include "spmoran/engine.hpp"

using namespace spmoran;

namespace {

SimParams family_params(int d) {
  SimParams p;
  p.geometry = Geometry::unbounded(d);
  p.seed = 1;
  return p;
}

// Sustained event throughput of the single-family engine: families are
// restarted as they die, so the state stays near the typical small sizes the
// tunneling runs spend their time in.
void BM_FamilyStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  SimParams p = family_params(d);
  RngStream rng(7);
  FamilySim sim(p);
  for (auto _ : state) {
    if (sim.size() == 0) sim = FamilySim(p);
    benchmark::DoNotOptimize(sim.step(rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FamilyStep)->Arg(1)->Arg(2)->Arg(3);

void BM_RunFamilyNeutral(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  SimParams p = family_params(d);
  FamilyCaps caps;
  caps.size_cap = 10'000;
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream rng(p.seed, rep++);
    benchmark::DoNotOptimize(run_family(p, caps, rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RunFamilyNeutral)->Arg(1)->Arg(3);

void BM_TorusStep(benchmark::State& state) {
  SimParams p;
  p.geometry = Geometry::torus(1, 1000);
  p.u1 = 1e-6;
  p.u2 = 1e-6;
  p.seed = 3;
  TorusSim sim(p);
  RngStream rng(11);
  for (auto _ : state) benchmark::DoNotOptimize(sim.step(rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TorusStep);

void BM_BetaWalk(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_beta(3, 2000, 200, seed++, 1));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_BetaWalk);

}  // namespace
