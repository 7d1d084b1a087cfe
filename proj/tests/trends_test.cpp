#include <doctest.h>

#include "fedmobile/experiments.hpp"

using namespace fedmobile;

// Statistical trend checks on the full-size default experiment. Slower than
// the unit suites, still deterministic for the frozen seed list.

TEST_CASE("every benchmark variant improves on its starting loss") {
  ExperimentConfig cfg = default_config();
  cfg.seeds = {1};
  for (const VariantConfig& vc : cfg.variants) {
    const RunMetrics m = run_variant(cfg, vc.spec, 1);
    CHECK(m.final_loss < m.loss.front());
    CHECK(m.violations.empty());
  }
}

TEST_CASE("more upload relays per interval never hurt on average") {
  ExperimentConfig cfg = default_config();
  const auto losses = sweep_final_losses(cfg, "k_up");
  REQUIRE(losses.size() == 3);  // K = 1, 2, 3
  CHECK(losses[2].second <= losses[0].second);
  CHECK(losses[1].second <= losses[0].second);
}

TEST_CASE("parallel sweep results do not depend on scheduling") {
  ExperimentConfig cfg = default_config();
  cfg.task = {20, 12, 10, 0.1, 5, 0.02, 0.5};
  cfg.schedule.interval = 12;
  cfg.horizon = 150;
  cfg.seeds = {1, 2, 3, 4};
  cfg.variants = default_variants();
  for (auto& vc : cfg.variants) {
    vc.spec.upload_window = {4, 8};
    vc.spec.download_window = {4, 8};
  }
  cfg.sweep.rhos = {0.0, 0.3, 0.8};
  const auto a = sweep_final_losses(cfg, "rho");
  const auto b = sweep_final_losses(cfg, "rho");
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].first == b[k].first);
    CHECK(a[k].second == b[k].second);  // bit-identical across schedules
  }
}
