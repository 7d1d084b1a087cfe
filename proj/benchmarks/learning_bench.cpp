#include <benchmark/benchmark.h>

#include "fedmobile/learning.hpp"

using namespace fedmobile;

namespace {

void BM_MinibatchGrad(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto task = gen_synthetic(4, d, 40, 0.1, 7);
  const ModelVector w(static_cast<std::size_t>(d), 0.1);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto g = minibatch_grad(w, task, 1, 5, seed++);
    benchmark::DoNotOptimize(g.vector.data());
  }
}

void BM_GlobalLoss(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto task = gen_synthetic(4, d, 40, 0.1, 7);
  const ModelVector w(static_cast<std::size_t>(d), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(global_loss(w, task));
}

}  // namespace

BENCHMARK(BM_MinibatchGrad)->Arg(50)->Arg(200);
BENCHMARK(BM_GlobalLoss)->Arg(50)->Arg(200);
