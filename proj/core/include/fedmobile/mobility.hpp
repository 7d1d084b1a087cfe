#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedmobile/types.hpp"

namespace fedmobile {

/// Per-client server-meeting slots. Meeting lists are strictly increasing,
/// start at slot >= 1, and extend past `horizon` so tau_next is defined for
/// every t in [0, horizon]. `delta` bounds every consecutive meeting gap,
/// including the warm-up gap from slot 0 to each client's first meeting.
struct MeetingSchedule {
  std::vector<std::vector<Slot>> meetings;  // index i-1 holds client i's slots
  Slot horizon = 0;
  Slot delta = 0;

  int n_clients() const { return static_cast<int>(meetings.size()); }
  const std::vector<Slot>& client_meetings(ClientId i) const;

  Slot first_meeting(ClientId i) const;
  bool is_meeting(ClientId i, Slot t) const;

  /// Last meeting at or before t (including t). Throws protocol_violation
  /// ("undefined-before-first-meeting") if t precedes the first meeting.
  Slot tau_last(ClientId i, Slot t) const;

  /// First meeting strictly after t. Throws if t is at or past the last
  /// generated meeting.
  Slot tau_next(ClientId i, Slot t) const;

  /// Line-oriented text form: `# horizon=H delta=D` then `i: s1,s2,...`.
  std::string to_text() const;
  static MeetingSchedule from_text(const std::string& text);

  friend bool operator==(const MeetingSchedule&, const MeetingSchedule&) = default;
};

/// Per-slot client-to-client contacts. Within any slot the pair set is a
/// matching: no client appears in two pairs (a client meets at most one
/// other client per slot). Pairs are stored with first < second.
struct PeerContactTrace {
  std::vector<std::vector<std::pair<ClientId, ClientId>>> contacts;  // index = slot, 0..horizon
  double rho = 0.0;
  std::uint64_t seed = 0;
  Slot horizon = 0;

  const std::vector<std::pair<ClientId, ClientId>>& at(Slot t) const;

  /// `# horizon=H rho=R seed=S` then `t: a-b,c-d,...` (empty slots omitted).
  std::string to_text() const;
  static PeerContactTrace from_text(const std::string& text);

  friend bool operator==(const PeerContactTrace&, const PeerContactTrace&) = default;
};

/// Client i meets the server at i, i+interval, i+2*interval, ...
MeetingSchedule gen_fixed_interval_schedule(int n_clients, Slot interval, Slot horizon);

/// Client i first meets at slot i; subsequent gaps are i.i.d. integer
/// uniform on [min_gap, max_gap].
MeetingSchedule gen_random_interval_schedule(int n_clients, Slot min_gap, Slot max_gap,
                                             Slot horizon, std::uint64_t seed);

/// Per slot: draw a uniformly random perfect-matching candidate (random
/// permutation, adjacent pairing), keep each candidate pair independently
/// with probability rho. With even n_clients each client's per-slot contact
/// probability is exactly rho; with odd n_clients one client per slot stays
/// unmatched.
PeerContactTrace gen_peer_contacts(int n_clients, double rho, Slot horizon,
                                   std::uint64_t seed);

}  // namespace fedmobile
