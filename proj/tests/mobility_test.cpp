#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fedmobile/errors.hpp"
#include "fedmobile/mobility.hpp"

using namespace fedmobile;

TEST_CASE("fixed-interval schedule matches the i + 50n rule") {
  const auto s = gen_fixed_interval_schedule(50, 50, 200);
  CHECK(s.client_meetings(1) == std::vector<Slot>{1, 51, 101, 151, 201});
  CHECK(s.client_meetings(50).front() == 50);
  CHECK(s.delta == 50);

  // scan: every consecutive gap equals the interval
  for (int i = 1; i <= 50; ++i) {
    const auto& ms = s.client_meetings(i);
    for (std::size_t k = 1; k < ms.size(); ++k) CHECK(ms[k] - ms[k - 1] == 50);
  }
}

TEST_CASE("degenerate interval: every slot is a meeting") {
  const auto s = gen_fixed_interval_schedule(1, 1, 5);
  CHECK(s.delta == 1);
  CHECK(s.client_meetings(1) == std::vector<Slot>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("random-interval gaps stay inside [min_gap, max_gap]") {
  const auto s = gen_random_interval_schedule(50, 30, 50, 1000, 42);
  CHECK(s.delta == 50);
  bool saw_nontrivial_gap = false;
  for (int i = 1; i <= 50; ++i) {
    const auto& ms = s.client_meetings(i);
    CHECK(ms.front() == i);
    for (std::size_t k = 1; k < ms.size(); ++k) {
      const Slot gap = ms[k] - ms[k - 1];
      CHECK(gap >= 30);
      CHECK(gap <= 50);
      if (gap != 40) saw_nontrivial_gap = true;
    }
    CHECK(ms.back() > 1000);  // tau_next defined through the horizon
  }
  CHECK(saw_nontrivial_gap);
}

TEST_CASE("random-interval with min_gap == max_gap degenerates to fixed") {
  const auto r = gen_random_interval_schedule(50, 40, 40, 1000, 7);
  const auto f = gen_fixed_interval_schedule(50, 40, 1000);
  for (int i = 1; i <= 50; ++i) CHECK(r.client_meetings(i) == f.client_meetings(i));
}

TEST_CASE("random-interval schedules are seed-deterministic") {
  const auto a = gen_random_interval_schedule(20, 30, 50, 500, 99);
  const auto b = gen_random_interval_schedule(20, 30, 50, 500, 99);
  const auto c = gen_random_interval_schedule(20, 30, 50, 500, 100);
  CHECK(a == b);
  CHECK(a.to_text() == b.to_text());
  CHECK(a != c);
}

TEST_CASE("tau_last / tau_next") {
  const auto s = gen_fixed_interval_schedule(50, 50, 200);

  SUBCASE("between meetings") {
    CHECK(s.tau_last(3, 60) == 53);
    CHECK(s.tau_next(3, 60) == 103);
  }
  SUBCASE("exactly at a meeting slot: tau_last includes t, tau_next excludes it") {
    CHECK(s.tau_last(3, 53) == 53);
    CHECK(s.tau_next(3, 53) == 103);
  }
  SUBCASE("query before the first meeting is an error") {
    CHECK_THROWS_AS((void)s.tau_last(3, 2), protocol_violation);
    CHECK(s.tau_next(3, 2) == 3);
  }
  SUBCASE("ordering and delta bound over a grid") {
    for (int i = 1; i <= 50; ++i) {
      for (Slot t = s.first_meeting(i); t <= 200; t += 7) {
        const Slot last = s.tau_last(i, t);
        const Slot next = s.tau_next(i, t);
        CHECK(last <= t);
        CHECK(t < next);
        CHECK(next - last <= s.delta);
      }
    }
  }
}

TEST_CASE("schedule text round trip") {
  const auto s = gen_random_interval_schedule(10, 30, 50, 300, 5);
  const auto back = MeetingSchedule::from_text(s.to_text());
  CHECK(back == s);
}

TEST_CASE("peer contacts: rho = 0 gives an empty trace") {
  const auto tr = gen_peer_contacts(50, 0.0, 100, 1);
  for (const auto& pairs : tr.contacts) CHECK(pairs.empty());
}

TEST_CASE("peer contacts: rho = 1 with even n gives a perfect matching every slot") {
  const int n = 50;
  const auto tr = gen_peer_contacts(n, 1.0, 200, 2);
  for (const auto& pairs : tr.contacts) {
    CHECK(pairs.size() == n / 2);
    std::set<ClientId> seen;
    for (auto [a, b] : pairs) {
      CHECK(a < b);
      CHECK(seen.insert(a).second);
      CHECK(seen.insert(b).second);
    }
  }
}

TEST_CASE("peer contacts: matching property and odd-n leftover") {
  const auto tr = gen_peer_contacts(7, 0.8, 500, 3);
  for (const auto& pairs : tr.contacts) {
    CHECK(pairs.size() <= 3);
    std::set<ClientId> seen;
    for (auto [a, b] : pairs) {
      CHECK(seen.insert(a).second);
      CHECK(seen.insert(b).second);
    }
  }
}

TEST_CASE("peer contacts: per-client contact rate concentrates at rho") {
  const int n = 50;
  const Slot slots = 10000;
  const double rho = 0.5;
  const auto tr = gen_peer_contacts(n, rho, slots - 1, 6);
  std::vector<long long> count(n + 1, 0);
  for (const auto& pairs : tr.contacts)
    for (auto [a, b] : pairs) {
      ++count[static_cast<std::size_t>(a)];
      ++count[static_cast<std::size_t>(b)];
    }
  const double se = std::sqrt(rho * (1 - rho) / static_cast<double>(slots));
  for (int i = 1; i <= n; ++i) {
    const double rate = static_cast<double>(count[static_cast<std::size_t>(i)]) /
                        static_cast<double>(slots);
    CHECK(std::abs(rate - rho) <= 3.0 * se);
  }
}

TEST_CASE("peer contacts: pair frequencies are uniform (chi-square, loose)") {
  const int n = 6;
  const Slot slots = 20000;
  const auto tr = gen_peer_contacts(n, 1.0, slots - 1, 5);
  std::map<std::pair<ClientId, ClientId>, long long> count;
  long long total = 0;
  for (const auto& pairs : tr.contacts)
    for (auto p : pairs) {
      ++count[p];
      ++total;
    }
  const int n_pairs = n * (n - 1) / 2;
  CHECK(count.size() == n_pairs);
  const double expected = static_cast<double>(total) / n_pairs;
  double chi2 = 0.0;
  for (const auto& [p, c] : count) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 60.0);  // df = 14; generous
}

TEST_CASE("peer contacts: determinism and text round trip") {
  const auto a = gen_peer_contacts(9, 0.4, 300, 11);
  const auto b = gen_peer_contacts(9, 0.4, 300, 11);
  CHECK(a == b);
  const auto back = PeerContactTrace::from_text(a.to_text());
  CHECK(back == a);
}
