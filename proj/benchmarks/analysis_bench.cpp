#include <benchmark/benchmark.h>

#include "fedmobile/analysis.hpp"

using namespace fedmobile;

namespace {

void BM_RelayProbabilityMonteCarlo(benchmark::State& state) {
  const auto family = ScheduleFamily::fixed(50);
  for (auto _ : state) {
    auto est = relay_probability_monte_carlo(RelayKind::Upload, family, 0.3, {20, 30},
                                             state.range(0), 42);
    benchmark::DoNotOptimize(est.estimate);
  }
}

void BM_BoundScan(benchmark::State& state) {
  for (auto _ : state) {
    auto rep = staleness_bound_scan(state.range(0));
    benchmark::DoNotOptimize(rep.pairs_scanned);
  }
}

}  // namespace

BENCHMARK(BM_RelayProbabilityMonteCarlo)->Arg(10000)->Arg(100000);
BENCHMARK(BM_BoundScan)->Arg(50)->Arg(200);
