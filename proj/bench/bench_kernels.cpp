#include <benchmark/benchmark.h>

#include "hopflab/constructions.hpp"
#include "hopflab/energy.hpp"
#include "hopflab/topology.hpp"

using namespace hopflab;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::Parallel : Execution::Serial;
}

void BM_EnergyMc(benchmark::State& state) {
  const SphereMap u = prescribed_hopf_map(state.range(1));
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  McOptions o;
  o.samples = 100'000;
  o.seed = 1;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(energy_mc(u, params, Region::whole(3), o).value);
  state.SetItemsProcessed(state.iterations() * o.samples);
}
BENCHMARK(BM_EnergyMc)->ArgsProduct({{0, 1}, {1, 9, 25}})->Unit(benchmark::kMillisecond);

void BM_Quadrature(benchmark::State& state) {
  const SphereMap h = hopf_map();
  QuadratureOptions o;
  o.resolution = 1;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(energy_quadrature(h, EnergyParams::critical_for(0.5, 3), o));
  state.SetItemsProcessed(state.iterations() * quadrature_pairs(3, o));
}
BENCHMARK(BM_Quadrature)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MappingDegree(benchmark::State& state) {
  const SphereMap v = multi_bubble(9, SpherePoint::basis(2, 0));
  for (auto _ : state) benchmark::DoNotOptimize(mapping_degree(v, 20000, mode(state)).raw);
}
BENCHMARK(BM_MappingDegree)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GaussLinking(benchmark::State& state) {
  const SphereMap h = hopf_map();
  const SpherePoint a = SpherePoint::basis(2, 0);
  const SpherePoint b = SpherePoint::basis(2, 1);
  const ClosedCurve c1 = trace_fiber(h, a, fiber_seeds(h, a)).front();
  const ClosedCurve c2 = trace_fiber(h, b, fiber_seeds(h, b)).front();
  for (auto _ : state) benchmark::DoNotOptimize(gauss_linking(c1, c2, mode(state)).raw);
}
BENCHMARK(BM_GaussLinking)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TraceFiber(benchmark::State& state) {
  const SphereMap u = prescribed_hopf_map(4);
  const SpherePoint t = SpherePoint::basis(2, 1);
  const std::vector<Vec> seeds = fiber_seeds(u, t);
  for (auto _ : state) benchmark::DoNotOptimize(trace_fiber(u, t, seeds).size());
}
BENCHMARK(BM_TraceFiber)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
