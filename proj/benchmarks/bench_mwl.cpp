#include <algorithm>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mwl/decomposition.hpp"
#include "mwl/norms.hpp"
#include "mwl/operators.hpp"
#include "mwl/weights.hpp"

using namespace mwl;

namespace {

StepFunction random_function(int depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  const DyadicGrid g(depth);
  std::vector<double> v(g.cell_count());
  for (double& x : v) x = e(rng);
  return StepFunction(g, std::move(v));
}

Weight rough_weight(std::uint64_t seed, int depth) { return gen_martingale(seed, depth, 0.4, std::min(8, depth)); }

void BM_MaximalDyadic(benchmark::State& state) {
  const auto f = random_function(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(maximal(f, SupMode::dyadic));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(f.size()));
}
BENCHMARK(BM_MaximalDyadic)->DenseRange(8, 16, 4)->Complexity();

void BM_MaximalIntervals(benchmark::State& state) {
  const auto f = random_function(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(maximal(f, SupMode::intervals));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(f.size()));
}
BENCHMARK(BM_MaximalIntervals)->DenseRange(6, 12, 2)->Complexity();

void BM_MultilinearMaximal(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const std::vector<StepFunction> fv{random_function(depth, 3), random_function(depth, 4), random_function(depth, 5)};
  for (auto _ : state) benchmark::DoNotOptimize(multilinear_maximal(fv, SupMode::intervals));
}
BENCHMARK(BM_MultilinearMaximal)->DenseRange(6, 10, 2);

void BM_A1(benchmark::State& state) {
  const Weight w = rough_weight(7, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(a1_constant(w, SupMode::intervals));
}
BENCHMARK(BM_A1)->DenseRange(6, 12, 2);

void BM_AinfIntervals(benchmark::State& state) {
  const Weight w = rough_weight(8, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ainf_constant(w, SupMode::intervals));
}
BENCHMARK(BM_AinfIntervals)->DenseRange(5, 9, 1);

void BM_AinfDyadic(benchmark::State& state) {
  const Weight w = rough_weight(9, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ainf_constant(w, SupMode::dyadic));
}
BENCHMARK(BM_AinfDyadic)->DenseRange(8, 14, 2);

void BM_RieszBilinear(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const std::vector<StepFunction> fv{random_function(depth, 10), random_function(depth, 11)};
  PVConfig pv;
  pv.m = 2;
  for (auto _ : state) benchmark::DoNotOptimize(multilinear_riesz(fv, pv));
}
BENCHMARK(BM_RieszBilinear)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_WeakQuasinorm(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const auto g = random_function(depth, 12);
  const WeightedMeasure mu(random_function(depth, 13));
  for (auto _ : state) benchmark::DoNotOptimize(weak_quasinorm(g, mu, 0.5));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(g.size()));
}
BENCHMARK(BM_WeakQuasinorm)->DenseRange(8, 16, 4)->Complexity();

void BM_BuildForest(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const std::vector<StepFunction> fv{random_function(depth, 14), random_function(depth, 15)};
  const Weight v = gen_martingale(16, depth, 0.3, 6);
  DecompositionConfig cfg;
  cfg.m = 2;
  for (auto _ : state) benchmark::DoNotOptimize(build_forest(fv, v, cfg));
}
BENCHMARK(BM_BuildForest)->DenseRange(8, 12, 2);

}  // namespace

BENCHMARK_MAIN();
