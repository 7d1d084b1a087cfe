#include <doctest.h>

#include "fedmobile/config.hpp"
#include "fedmobile/errors.hpp"
#include "fedmobile/report.hpp"

using namespace fedmobile;

TEST_CASE("task CSV dump round trips exactly") {
  const auto task = gen_synthetic(4, 7, 6, 0.15, 99, 9, 0.4);
  const auto back = task_from_csv(task_to_csv(task, "deadbeef"));
  CHECK(back.n_clients == task.n_clients);
  CHECK(back.d == task.d);
  CHECK(back.n_per_client == task.n_per_client);
  CHECK(back.noise_std == task.noise_std);
  CHECK(back.w_true == task.w_true);
  CHECK(back.features == task.features);
  CHECK(back.labels == task.labels);
  CHECK(back.test_features == task.test_features);
  CHECK(back.test_labels == task.test_labels);
  CHECK_THROWS_AS((void)task_from_csv("junk,1,2\n"), config_error);
}

TEST_CASE("default config is valid with the six benchmark variants") {
  const auto cfg = default_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.variants.size() == 6);
  CHECK(cfg.variants.front().name == "async");
  CHECK(cfg.variants.back().name == "fedmobile");
  CHECK(cfg.delta() == 50);
  CHECK(cfg.seeds.size() == 3);
}

TEST_CASE("partial JSON gets defaults filled in") {
  const auto cfg = config_from_json_text(R"({"horizon": 400, "rho": 0.5})");
  CHECK(cfg.horizon == 400);
  CHECK(cfg.rho == 0.5);
  CHECK(cfg.task.d == 200);
  CHECK(cfg.task.eta == 0.01);
  CHECK(cfg.variants.size() == 6);
}

TEST_CASE("canonical JSON round trips and makes every default explicit") {
  const auto cfg = default_config();
  const std::string text = canonical_json(cfg);
  CHECK(text.find("\"eta\"") != std::string::npos);
  CHECK(text.find("\"upload_window\"") != std::string::npos);
  const auto back = config_from_json_text(text);
  CHECK(canonical_json(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("config hash is stable and input-sensitive") {
  auto cfg = default_config();
  const std::string h1 = config_hash(cfg);
  CHECK(h1 == config_hash(cfg));
  cfg.task.eta = 0.02;
  CHECK(config_hash(cfg) != h1);
}

TEST_CASE("variant JSON controls the relay parameters") {
  const auto cfg = config_from_json_text(R"({
    "variants": [
      {"kind": "FEDMOBILE", "name": "fm", "upload_window": [10, 20],
       "download_window": [5, 15], "k_up": 3, "k_down": 2,
       "download_mode": "LOCAL_MODEL", "download_qualification": "LAST_MEETING"}
    ]
  })");
  REQUIRE(cfg.variants.size() == 1);
  const VariantSpec& v = cfg.variants[0].spec;
  CHECK(v.kind == VariantKind::FedMobile);
  CHECK(v.upload_window == SearchWindow{10, 20});
  CHECK(v.download_window == SearchWindow{5, 15});
  CHECK(v.k_up == 3);
  CHECK(v.k_down == 2);
  CHECK(v.download_mode == DownloadMode::LocalModel);
  CHECK(v.download_qualification == DownloadQualification::LastMeeting);
}

TEST_CASE("field-level validation errors") {
  CHECK_THROWS_WITH_AS((void)config_from_json_text(R"({"task": {"d": 0}})"),
                       doctest::Contains("task.d"), config_error);
  CHECK_THROWS_WITH_AS((void)config_from_json_text(R"({"task": {"batch_size": 41}})"),
                       doctest::Contains("batch_size"), config_error);
  CHECK_THROWS_WITH_AS((void)config_from_json_text(R"({"rho": 1.5})"),
                       doctest::Contains("rho"), config_error);
  CHECK_THROWS_WITH_AS(
      (void)config_from_json_text(R"({"variants": [{"kind": "FEDMOBILE", "upload_window": [40, 90]}]})"),
      doctest::Contains("window"), config_error);
  CHECK_THROWS_WITH_AS(
      (void)config_from_json_text(
          R"({"variants": [{"kind": "ASYNC", "name": "a"}, {"kind": "FEDMOBILE", "name": "a"}]})"),
      doctest::Contains("duplicate variant name"), config_error);
  CHECK_THROWS_AS((void)config_from_json_text(R"({"variants": [{"kind": "GOSSIP"}]})"),
                  config_error);
  CHECK_THROWS_AS((void)config_from_json_text("not json"), config_error);
  CHECK_THROWS_AS((void)config_from_json_text(R"({"schedule": {"kind": "walk"}})"),
                  config_error);
  CHECK_THROWS_AS((void)config_from_json_text(R"({"seeds": []})"), config_error);
}

TEST_CASE("missing config file raises a config error") {
  CHECK_THROWS_WITH_AS((void)load_config("/nonexistent/path/cfg.json"),
                       doctest::Contains("cannot open"), config_error);
}

TEST_CASE("random schedule kind carries its own delta") {
  const auto cfg = config_from_json_text(
      R"({"schedule": {"kind": "random", "min_gap": 30, "max_gap": 45}})");
  CHECK(cfg.delta() == 45);
  CHECK_THROWS_AS((void)config_from_json_text(
                      R"({"schedule": {"kind": "random", "min_gap": 50, "max_gap": 45}})"),
                  config_error);
}
