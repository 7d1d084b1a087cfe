#include "fedmobile/mobility.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fedmobile/errors.hpp"
#include "fedmobile/rng.hpp"

namespace fedmobile {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

void check_client(const MeetingSchedule& s, ClientId i) {
  if (i < 1 || i > s.n_clients())
    throw config_error("client id out of range: " + std::to_string(i));
}

// Max consecutive gap over all clients, counting the warm-up gap from slot 0.
Slot scan_max_gap(const std::vector<std::vector<Slot>>& meetings) {
  Slot worst = 0;
  for (const auto& ms : meetings) {
    Slot prev = 0;
    for (Slot m : ms) {
      worst = std::max(worst, m - prev);
      prev = m;
    }
  }
  return worst;
}

}  // namespace

const std::vector<Slot>& MeetingSchedule::client_meetings(ClientId i) const {
  check_client(*this, i);
  return meetings[static_cast<std::size_t>(i - 1)];
}

Slot MeetingSchedule::first_meeting(ClientId i) const { return client_meetings(i).front(); }

bool MeetingSchedule::is_meeting(ClientId i, Slot t) const {
  const auto& ms = client_meetings(i);
  return std::binary_search(ms.begin(), ms.end(), t);
}

Slot MeetingSchedule::tau_last(ClientId i, Slot t) const {
  const auto& ms = client_meetings(i);
  auto it = std::upper_bound(ms.begin(), ms.end(), t);
  if (it == ms.begin())
    throw protocol_violation("undefined-before-first-meeting: tau_last(client " +
                                 std::to_string(i) + ", t=" + std::to_string(t) + ")",
                             t, i);
  return *std::prev(it);
}

Slot MeetingSchedule::tau_next(ClientId i, Slot t) const {
  const auto& ms = client_meetings(i);
  auto it = std::upper_bound(ms.begin(), ms.end(), t);
  if (it == ms.end())
    throw protocol_violation("tau_next past last generated meeting (client " +
                                 std::to_string(i) + ", t=" + std::to_string(t) + ")",
                             t, i);
  return *it;
}

std::string MeetingSchedule::to_text() const {
  std::ostringstream out;
  out << "# horizon=" << horizon << " delta=" << delta << "\n";
  for (int i = 1; i <= n_clients(); ++i) {
    out << i << ":";
    const auto& ms = meetings[static_cast<std::size_t>(i - 1)];
    for (std::size_t k = 0; k < ms.size(); ++k) out << (k ? "," : " ") << ms[k];
    out << "\n";
  }
  return out.str();
}

MeetingSchedule MeetingSchedule::from_text(const std::string& text) {
  MeetingSchedule s;
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<int, std::vector<Slot>>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t h = line.find("horizon=");
      std::size_t d = line.find("delta=");
      require(h != std::string::npos && d != std::string::npos,
              "schedule text: malformed header line");
      s.horizon = std::stoll(line.substr(h + 8));
      s.delta = std::stoll(line.substr(d + 6));
      continue;
    }
    std::size_t colon = line.find(':');
    require(colon != std::string::npos, "schedule text: missing ':' in line " + line);
    int id = std::stoi(line.substr(0, colon));
    std::vector<Slot> ms;
    std::istringstream rest(line.substr(colon + 1));
    std::string tok;
    while (std::getline(rest, tok, ',')) {
      if (!tok.empty()) ms.push_back(std::stoll(tok));
    }
    require(!ms.empty() && ms.front() >= 1, "schedule text: client " + std::to_string(id) +
                                                " needs meetings starting at slot >= 1");
    require(std::is_sorted(ms.begin(), ms.end()) &&
                std::adjacent_find(ms.begin(), ms.end()) == ms.end(),
            "schedule text: meetings must be strictly increasing");
    rows.emplace_back(id, std::move(ms));
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k].first == static_cast<int>(k + 1),
            "schedule text: client ids must cover 1..N");
    s.meetings.push_back(std::move(rows[k].second));
  }
  require(!s.meetings.empty(), "schedule text: no clients");
  s.delta = std::max(s.delta, scan_max_gap(s.meetings));
  return s;
}

MeetingSchedule gen_fixed_interval_schedule(int n_clients, Slot interval, Slot horizon) {
  require(n_clients >= 1, "gen_fixed_interval_schedule: n_clients must be >= 1");
  require(interval >= 1, "gen_fixed_interval_schedule: interval must be >= 1");
  require(horizon >= 1, "gen_fixed_interval_schedule: horizon must be >= 1");

  MeetingSchedule s;
  s.horizon = horizon;
  s.delta = std::max<Slot>(interval, n_clients);  // warm-up gap of client N is N
  s.meetings.resize(static_cast<std::size_t>(n_clients));
  for (int i = 1; i <= n_clients; ++i) {
    auto& ms = s.meetings[static_cast<std::size_t>(i - 1)];
    for (Slot m = i; m <= horizon + s.delta; m += interval) ms.push_back(m);
  }
  s.delta = std::max(s.delta, scan_max_gap(s.meetings));
  return s;
}

MeetingSchedule gen_random_interval_schedule(int n_clients, Slot min_gap, Slot max_gap,
                                             Slot horizon, std::uint64_t seed) {
  require(n_clients >= 1, "gen_random_interval_schedule: n_clients must be >= 1");
  require(min_gap >= 1 && min_gap <= max_gap,
          "gen_random_interval_schedule: need 1 <= min_gap <= max_gap");
  require(horizon >= 1, "gen_random_interval_schedule: horizon must be >= 1");

  MeetingSchedule s;
  s.horizon = horizon;
  s.delta = std::max<Slot>(max_gap, n_clients);
  s.meetings.resize(static_cast<std::size_t>(n_clients));
  for (int i = 1; i <= n_clients; ++i) {
    auto rng = make_rng(seed, Stream::Schedule, static_cast<std::uint64_t>(i));
    std::uniform_int_distribution<Slot> gap(min_gap, max_gap);
    auto& ms = s.meetings[static_cast<std::size_t>(i - 1)];
    Slot m = i;
    while (m <= horizon + s.delta) {
      ms.push_back(m);
      m += gap(rng);
    }
  }
  s.delta = std::max(s.delta, scan_max_gap(s.meetings));
  return s;
}

const std::vector<std::pair<ClientId, ClientId>>& PeerContactTrace::at(Slot t) const {
  if (t < 0 || t >= static_cast<Slot>(contacts.size()))
    throw config_error("contact trace queried outside generated slots: t=" +
                       std::to_string(t));
  return contacts[static_cast<std::size_t>(t)];
}

std::string PeerContactTrace::to_text() const {
  std::ostringstream out;
  out << "# horizon=" << horizon << " rho=" << rho << " seed=" << seed << "\n";
  for (Slot t = 0; t < static_cast<Slot>(contacts.size()); ++t) {
    const auto& pairs = contacts[static_cast<std::size_t>(t)];
    if (pairs.empty()) continue;
    out << t << ":";
    for (std::size_t k = 0; k < pairs.size(); ++k)
      out << (k ? "," : " ") << pairs[k].first << "-" << pairs[k].second;
    out << "\n";
  }
  return out.str();
}

PeerContactTrace PeerContactTrace::from_text(const std::string& text) {
  PeerContactTrace tr;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t h = line.find("horizon=");
      std::size_t r = line.find("rho=");
      std::size_t sd = line.find("seed=");
      require(h != std::string::npos && r != std::string::npos && sd != std::string::npos,
              "contact text: malformed header line");
      tr.horizon = std::stoll(line.substr(h + 8));
      tr.rho = std::stod(line.substr(r + 4));
      tr.seed = std::stoull(line.substr(sd + 5));
      tr.contacts.assign(static_cast<std::size_t>(tr.horizon) + 1, {});
      continue;
    }
    require(!tr.contacts.empty(), "contact text: header line must come first");
    std::size_t colon = line.find(':');
    require(colon != std::string::npos, "contact text: missing ':' in line " + line);
    Slot t = std::stoll(line.substr(0, colon));
    require(t >= 0 && t <= tr.horizon, "contact text: slot out of range");
    auto& pairs = tr.contacts[static_cast<std::size_t>(t)];
    std::istringstream rest(line.substr(colon + 1));
    std::string tok;
    while (std::getline(rest, tok, ',')) {
      if (tok.empty()) continue;
      std::size_t dash = tok.find('-');
      require(dash != std::string::npos, "contact text: malformed pair " + tok);
      ClientId a = std::stoi(tok.substr(0, dash));
      ClientId b = std::stoi(tok.substr(dash + 1));
      pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  return tr;
}

PeerContactTrace gen_peer_contacts(int n_clients, double rho, Slot horizon,
                                   std::uint64_t seed) {
  require(n_clients >= 1, "gen_peer_contacts: n_clients must be >= 1");
  require(rho >= 0.0 && rho <= 1.0, "gen_peer_contacts: rho must be in [0,1]");
  require(horizon >= 0, "gen_peer_contacts: horizon must be >= 0");

  PeerContactTrace tr;
  tr.rho = rho;
  tr.seed = seed;
  tr.horizon = horizon;
  tr.contacts.assign(static_cast<std::size_t>(horizon) + 1, {});
  if (rho == 0.0 || n_clients < 2) return tr;

  std::vector<ClientId> perm(static_cast<std::size_t>(n_clients));
  std::iota(perm.begin(), perm.end(), 1);
  for (Slot t = 0; t <= horizon; ++t) {
    auto rng = make_rng(seed, Stream::Contacts, static_cast<std::uint64_t>(t));
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto& pairs = tr.contacts[static_cast<std::size_t>(t)];
    for (int k = 0; k + 1 < n_clients; k += 2) {
      const bool keep = rho >= 1.0 || unif(rng) < rho;
      if (keep) {
        ClientId a = perm[static_cast<std::size_t>(k)];
        ClientId b = perm[static_cast<std::size_t>(k + 1)];
        pairs.emplace_back(std::min(a, b), std::max(a, b));
      }
    }
    std::sort(pairs.begin(), pairs.end());
  }
  return tr;
}

}  // namespace fedmobile
