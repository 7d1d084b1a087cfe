#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedmobile/types.hpp"
#include "fedmobile/learning.hpp"

namespace fedmobile {

/// Inclusive range of SGD step indices.
struct StepRange {
  Slot lo = 0;
  Slot hi = 0;
  friend bool operator==(const StepRange&, const StepRange&) = default;
};

/// Per-origin sets of delivered/carried step ranges, kept sorted, disjoint
/// and adjacency-coalesced. Any overlapping insert is a protocol violation:
/// the same (origin, step) must never exist twice anywhere in the system.
class CoverageSet {
 public:
  /// Append one step for an origin; merges with the trailing range when
  /// contiguous. Throws protocol_violation ("duplicate-step") on overlap.
  void add_step(ClientId origin, Slot step);

  /// Insert an inclusive range. Throws protocol_violation
  /// ("duplicate-delivery") on any overlap with existing coverage.
  void add_range(ClientId origin, StepRange r);

  /// Union with another coverage set (COMBINE / server delivery).
  void merge_from(const CoverageSet& other);

  bool empty() const { return ranges_.empty(); }
  void clear() { ranges_.clear(); }

  /// Largest s such that steps 0..s are all covered for this origin;
  /// -1 when step 0 is not covered.
  Slot prefix_end(ClientId origin) const;

  long long total_steps() const;
  bool overlaps(const CoverageSet& other) const;

  const std::map<ClientId, std::vector<StepRange>>& ranges() const { return ranges_; }

  /// Compact audit form, e.g. "3:0-24;7:10-19,30-34".
  std::string summary() const;

  friend bool operator==(const CoverageSet&, const CoverageSet&) = default;

 private:
  std::map<ClientId, std::vector<StepRange>> ranges_;
};

/// A relayed CLU payload: the exact sum of eta-scaled gradients over the
/// covered (origin, step) pairs.
struct CluChunk {
  std::vector<double> payload;
  CoverageSet coverage;

  bool empty() const { return coverage.empty(); }
  void clear();
};

struct ClientState {
  ModelVector local_model;
  ModelVector global_copy;   // x^{psi}: most recent global model received
  CluChunk clu;
  Slot psi = 0;              // timestamp of global_copy; slot 0 = warm-up copy of x^0
  int upload_budget_left = 0;
  int download_budget_left = 0;
  Slot last_server_meeting = 0;  // slot 0 acts as a virtual first meeting
};

struct ServerState {
  ModelVector global_model;
  CoverageSet received_coverage;

  /// Latest step s such that all of client i's gradients 0..s have arrived.
  Slot phi(ClientId i) const { return received_coverage.prefix_end(i); }
};

enum class DownloadMode { GlobalCopy, LocalModel };

/// How download relays are qualified: by the relayed-copy timestamp psi
/// (default; lets chained fresh copies qualify) or strictly by the relay's
/// own last server meeting.
enum class DownloadQualification { CopyTimestamp, LastMeeting };

/// CLU recursion: payload += eta * grad, coverage extended by grad's step.
/// A fresh range starts automatically after every RESET/meeting since the
/// coverage was cleared. Throws on an already-covered step.
void accumulate_clu(ClientState& state, const GradientSample& grad, double eta);

/// Window + timing test only (no budget, no strictly-better test):
/// the relay could deliver before the end of the sender's search interval.
bool upload_semi_qualified(Slot sender_tau_last, Slot relay_tau_next, SearchWindow w);

/// Full upload relay rule: in-window, semi-qualified, strictly earlier
/// delivery than the sender's own next meeting, and budget remaining.
bool upload_relay_decision(const ClientState& sender, Slot sender_tau_next,
                           Slot relay_tau_next, Slot t, SearchWindow w);

/// RESET/COMBINE: relay absorbs the sender's payload and coverage; the
/// sender's CLU empties; sender's upload budget is consumed (also for an
/// empty CLU: the meeting was used). Neither local model changes.
void exchange_upload(ClientState& sender, ClientState& relay);

bool download_semi_qualified(Slot receiver_tau_next, Slot relay_freshness, SearchWindow w);

/// Full download relay rule: in-window, semi-qualified, relay's copy strictly
/// fresher than the receiver's, and budget remaining. Freshness is psi or
/// last_server_meeting depending on the qualification mode.
bool download_relay_decision(const ClientState& receiver, Slot receiver_tau_next,
                             const ClientState& relay, Slot t, SearchWindow w,
                             DownloadQualification qual = DownloadQualification::CopyTimestamp);

/// REPLACE: receiver adopts the relay's global-model copy (GlobalCopy mode)
/// or the relay's current local model (LocalModel mode) and the relay's psi.
/// The receiver's CLU is NOT cleared; download budget is consumed; the relay
/// is unchanged.
void exchange_download(ClientState& receiver, const ClientState& relay,
                       DownloadMode mode = DownloadMode::GlobalCopy);

/// Direct server meeting for a batch of clients in the same slot: one
/// aggregated global-model update (the per-slot sum over meeting clients),
/// then every meeting client downloads the post-update model, clears its CLU,
/// sets psi = t and refills both relay budgets.
void server_meeting_batch(std::span<ClientState*> clients, ServerState& server, Slot t,
                          int n_clients, int k_up, int k_down);

/// Single-client convenience wrapper over server_meeting_batch.
void server_meeting(ClientState& client, ServerState& server, Slot t, int n_clients,
                    int k_up, int k_down);

}  // namespace fedmobile
