#include <doctest.h>

#include <cmath>

#include "fedmobile/errors.hpp"
#include "fedmobile/protocol.hpp"
#include "fedmobile/rng.hpp"
#include "fedmobile/vec.hpp"

using namespace fedmobile;

namespace {

GradientSample grad_of(ClientId client, Slot step, std::vector<double> v) {
  GradientSample g;
  g.client = client;
  g.step_index = step;
  g.vector = std::move(v);
  return g;
}

ClientState client_with_clu(ClientId origin, Slot step_lo, Slot step_hi,
                            std::vector<double> payload) {
  ClientState c;
  c.clu.payload = std::move(payload);
  c.clu.coverage.add_range(origin, {step_lo, step_hi});
  c.upload_budget_left = 1;
  c.download_budget_left = 1;
  return c;
}

}  // namespace

TEST_CASE("CoverageSet: coalescing, prefix and collisions") {
  CoverageSet cov;
  cov.add_step(1, 0);
  cov.add_step(1, 1);
  cov.add_range(1, {3, 5});
  CHECK(cov.prefix_end(1) == 1);  // gap at 2
  CHECK(cov.total_steps() == 5);

  cov.add_step(1, 2);  // fills the gap; everything coalesces
  CHECK(cov.prefix_end(1) == 5);
  CHECK(cov.ranges().at(1).size() == 1);
  CHECK(cov.summary() == "1:0-5");

  CHECK(cov.prefix_end(2) == -1);
  cov.add_range(2, {4, 6});
  CHECK(cov.prefix_end(2) == -1);  // step 0 missing

  CHECK_THROWS_AS(cov.add_range(1, {5, 7}), protocol_violation);
  CHECK_THROWS_AS(cov.add_step(2, 4), protocol_violation);

  CoverageSet other;
  other.add_range(1, {2, 3});
  CHECK(cov.overlaps(other));
  CHECK_THROWS_AS(cov.merge_from(other), protocol_violation);
}

TEST_CASE("accumulate_clu follows the CLU recursion") {
  ClientState c;
  accumulate_clu(c, grad_of(4, 0, {1.0, 2.0}), 0.1);
  CHECK(c.clu.payload == std::vector<double>{0.1, 0.2});
  CHECK(c.clu.coverage.summary() == "4:0-0");

  ClientState c2;
  accumulate_clu(c2, grad_of(1, 0, {1.0, 0.0}), 1.0);
  accumulate_clu(c2, grad_of(1, 1, {0.0, 1.0}), 1.0);
  CHECK(c2.clu.payload == std::vector<double>{1.0, 1.0});
  CHECK(c2.clu.coverage.summary() == "1:0-1");

  CHECK_THROWS_AS(accumulate_clu(c2, grad_of(1, 1, {1.0, 1.0}), 1.0), protocol_violation);
}

TEST_CASE("CLU telescopes the local-model trajectory") {
  auto rng = make_rng(55);
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  const double eta = 0.05;
  ClientState c;
  c.local_model = {0.3, -0.2, 1.1};
  const ModelVector start = c.local_model;
  for (Slot s = 10; s < 30; ++s) {
    GradientSample g = grad_of(2, s, {stdnorm(rng), stdnorm(rng), stdnorm(rng)});
    accumulate_clu(c, g, eta);
    c.local_model = sgd_step(c.local_model, g, eta);
  }
  // payload == x^t - x^{t+k+1}
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::abs(c.clu.payload[k] - (start[k] - c.local_model[k])) < 1e-12);
}

TEST_CASE("upload relay rule") {
  ClientState sender;
  sender.last_server_meeting = 0;
  sender.upload_budget_left = 1;
  const SearchWindow w{20, 30};

  CHECK(upload_relay_decision(sender, 50, 28, 25, w));         // the worked example
  CHECK_FALSE(upload_relay_decision(sender, 50, 28, 10, w));   // outside the window
  CHECK_FALSE(upload_relay_decision(sender, 50, 35, 25, w));   // not semi-qualified
  CHECK_FALSE(upload_relay_decision(sender, 25, 28, 25, w));   // relay not strictly earlier
  sender.upload_budget_left = 0;
  CHECK_FALSE(upload_relay_decision(sender, 50, 28, 25, w));   // budget exhausted
}

TEST_CASE("exchange_upload: RESET and COMBINE") {
  auto sender = client_with_clu(1, 0, 4, {1.0, 2.0});
  auto relay = client_with_clu(2, 0, 9, {3.0, 4.0});
  sender.local_model = {7.0, 7.0};
  relay.local_model = {8.0, 8.0};

  exchange_upload(sender, relay);
  CHECK(sender.clu.payload == std::vector<double>{0.0, 0.0});
  CHECK(sender.clu.empty());
  CHECK(relay.clu.payload == std::vector<double>{4.0, 6.0});
  CHECK(relay.clu.coverage.summary() == "1:0-4;2:0-9");
  CHECK(sender.upload_budget_left == 0);
  CHECK(sender.local_model == ModelVector{7.0, 7.0});  // training unaffected
  CHECK(relay.local_model == ModelVector{8.0, 8.0});
}

TEST_CASE("exchange_upload with an empty CLU still consumes the budget") {
  ClientState sender;
  sender.upload_budget_left = 1;
  auto relay = client_with_clu(2, 0, 3, {3.0, 4.0});
  exchange_upload(sender, relay);
  CHECK(sender.upload_budget_left == 0);
  CHECK(relay.clu.payload == std::vector<double>{3.0, 4.0});
  CHECK(relay.clu.coverage.summary() == "2:0-3");
}

TEST_CASE("a client with exhausted budgets can still serve as a relay") {
  auto sender = client_with_clu(1, 0, 4, {1.0, 2.0});
  auto relay = client_with_clu(2, 0, 9, {3.0, 4.0});
  relay.upload_budget_left = 0;
  relay.download_budget_left = 0;
  relay.psi = 40;

  // upload: only the sender's budget gates the exchange
  sender.last_server_meeting = 0;
  CHECK(upload_relay_decision(sender, 50, 28, 25, {20, 30}));
  exchange_upload(sender, relay);
  CHECK(relay.clu.coverage.summary() == "1:0-4;2:0-9");

  // download: the relay's budget is equally irrelevant
  ClientState receiver;
  receiver.download_budget_left = 1;
  CHECK(download_relay_decision(receiver, 50, relay, 25, {20, 30}));
  exchange_download(receiver, relay);
  CHECK(receiver.psi == 40);
}

TEST_CASE("relay chain delivers coverage exactly once") {
  auto a = client_with_clu(1, 0, 4, {1.0, 0.0});
  auto b = client_with_clu(2, 0, 6, {0.0, 1.0});
  auto c = client_with_clu(3, 0, 2, {1.0, 1.0});
  b.upload_budget_left = 1;

  exchange_upload(a, b);  // a -> b
  exchange_upload(b, c);  // b (carrying a) -> c
  CHECK(c.clu.coverage.summary() == "1:0-4;2:0-6;3:0-2");
  CHECK(c.clu.payload == std::vector<double>{2.0, 2.0});
  CHECK(a.clu.empty());
  CHECK(b.clu.empty());
}

TEST_CASE("download relay rule") {
  ClientState receiver;
  receiver.psi = 0;
  receiver.download_budget_left = 1;
  ClientState relay;
  relay.psi = 23;
  const SearchWindow w{20, 30};

  CHECK(download_relay_decision(receiver, 50, relay, 25, w));  // the worked example
  relay.psi = receiver.psi;
  CHECK_FALSE(download_relay_decision(receiver, 50, relay, 25, w));  // not fresher
  relay.psi = 23;
  CHECK_FALSE(download_relay_decision(receiver, 50, relay, 40, w));  // past the window
  relay.psi = 15;
  CHECK_FALSE(download_relay_decision(receiver, 50, relay, 25, w));  // not semi-qualified

  SUBCASE("strict last-meeting qualification ignores relayed copies") {
    relay.psi = 23;
    relay.last_server_meeting = 0;  // fresh copy came via another relay
    CHECK(download_relay_decision(receiver, 50, relay, 25, w,
                                  DownloadQualification::CopyTimestamp));
    CHECK_FALSE(download_relay_decision(receiver, 50, relay, 25, w,
                                        DownloadQualification::LastMeeting));
    relay.last_server_meeting = 23;
    CHECK(download_relay_decision(receiver, 50, relay, 25, w,
                                  DownloadQualification::LastMeeting));
  }
}

TEST_CASE("exchange_download: REPLACE") {
  ClientState receiver = client_with_clu(1, 3, 7, {0.5, 0.5});
  receiver.psi = 0;
  receiver.local_model = {9.0, 9.0};
  receiver.global_copy = {0.0, 0.0};
  receiver.download_budget_left = 1;

  ClientState relay;
  relay.psi = 23;
  relay.global_copy = {1.0, 2.0};
  relay.local_model = {1.5, 2.5};
  const ClientState relay_before = relay;

  SUBCASE("global-copy mode") {
    exchange_download(receiver, relay, DownloadMode::GlobalCopy);
    CHECK(receiver.psi == 23);
    CHECK(receiver.local_model == ModelVector{1.0, 2.0});
    CHECK(receiver.global_copy == ModelVector{1.0, 2.0});
    CHECK(receiver.clu.coverage.summary() == "1:3-7");  // CLU untouched
    CHECK(receiver.download_budget_left == 0);
  }
  SUBCASE("local-model mode") {
    exchange_download(receiver, relay, DownloadMode::LocalModel);
    CHECK(receiver.psi == 23);
    CHECK(receiver.local_model == ModelVector{1.5, 2.5});
  }
  CHECK(relay.psi == relay_before.psi);  // one-directional transfer
  CHECK(relay.local_model == relay_before.local_model);
  CHECK(relay.global_copy == relay_before.global_copy);
}

TEST_CASE("server_meeting applies the aggregated global update") {
  ServerState server;
  server.global_model = {1.0, 1.0};
  auto c = client_with_clu(1, 0, 9, {0.2, 0.0});
  c.local_model = {5.0, 5.0};

  server_meeting(c, server, 10, 2, 1, 1);
  CHECK(server.global_model == ModelVector{0.9, 1.0});
  CHECK(c.local_model == ModelVector{0.9, 1.0});
  CHECK(c.global_copy == ModelVector{0.9, 1.0});
  CHECK(c.psi == 10);
  CHECK(c.last_server_meeting == 10);
  CHECK(c.upload_budget_left == 1);
  CHECK(c.download_budget_left == 1);
  CHECK(c.clu.empty());
  CHECK(server.phi(1) == 9);
  CHECK(server.phi(2) == -1);
}

TEST_CASE("simultaneous meetings: aggregated vs sequential subtraction") {
  auto make = [] {
    ServerState s;
    s.global_model = {0.37, -1.25, 0.08};
    return s;
  };
  auto a1 = client_with_clu(1, 0, 4, {0.11, -0.07, 0.31});
  auto a2 = client_with_clu(2, 0, 4, {-0.05, 0.21, 0.13});
  auto b1 = a1;
  auto b2 = a2;

  ServerState agg = make();
  ClientState* both[] = {&a1, &a2};
  server_meeting_batch(both, agg, 5, 2, 1, 1);

  ServerState seq = make();
  server_meeting(b1, seq, 5, 2, 1, 1);
  server_meeting(b2, seq, 5, 2, 1, 1);

  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::abs(agg.global_model[k] - seq.global_model[k]) <= 1e-12);

  // with one aggregated update, both clients download the same x^t
  CHECK(a1.local_model == a2.local_model);
}

TEST_CASE("duplicate delivery to the server is rejected") {
  ServerState server;
  server.global_model = {0.0, 0.0};
  auto c1 = client_with_clu(1, 0, 4, {0.1, 0.1});
  server_meeting(c1, server, 5, 2, 1, 1);

  auto c2 = client_with_clu(1, 2, 6, {0.1, 0.1});  // overlaps steps 2..4
  CHECK_THROWS_AS(server_meeting(c2, server, 7, 2, 1, 1), protocol_violation);
}
