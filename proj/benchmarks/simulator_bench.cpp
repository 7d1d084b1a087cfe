#include <benchmark/benchmark.h>

#include "fedmobile/experiments.hpp"

using namespace fedmobile;

namespace {

ExperimentConfig bench_config(Slot horizon) {
  ExperimentConfig cfg;
  cfg.task = {50, 20, 20, 0.1, 5, 0.01};
  cfg.schedule.interval = 20;
  cfg.rho = 1.0;
  cfg.horizon = horizon;
  cfg.variants = default_variants();
  for (auto& vc : cfg.variants) {
    vc.spec.upload_window = {8, 12};
    vc.spec.download_window = {8, 12};
  }
  return cfg;
}

void BM_RunAsync(benchmark::State& state) {
  const auto cfg = bench_config(state.range(0));
  VariantSpec v;
  v.kind = VariantKind::Async;
  for (auto _ : state) {
    auto m = run_variant(cfg, v, 1);
    benchmark::DoNotOptimize(m.final_loss);
  }
}

void BM_RunFedMobile(benchmark::State& state) {
  const auto cfg = bench_config(state.range(0));
  VariantSpec v;
  v.kind = VariantKind::FedMobile;
  v.upload_window = {8, 12};
  v.download_window = {8, 12};
  for (auto _ : state) {
    auto m = run_variant(cfg, v, 1);
    benchmark::DoNotOptimize(m.final_loss);
  }
}

}  // namespace

BENCHMARK(BM_RunAsync)->Unit(benchmark::kMillisecond)->Arg(100)->Arg(400);
BENCHMARK(BM_RunFedMobile)->Unit(benchmark::kMillisecond)->Arg(100)->Arg(400);
