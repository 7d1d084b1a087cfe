#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedmobile/learning.hpp"
#include "fedmobile/mobility.hpp"
#include "fedmobile/protocol.hpp"
#include "fedmobile/types.hpp"

namespace fedmobile {

enum class VariantKind { Async, FedMobileU, FedMobileD, FedMobile, VirtualU, VirtualD };

std::string to_string(VariantKind kind);           // "FEDMOBILE_U", ...
VariantKind variant_kind_from_string(const std::string& name);

/// One benchmark algorithm: which relay directions are active, their search
/// windows and budgets, and the download-exchange flavour.
struct VariantSpec {
  VariantKind kind = VariantKind::Async;
  SearchWindow upload_window{20, 30};    // offsets from tau_last
  SearchWindow download_window{20, 30};  // offsets back from tau_next
  int k_up = 1;
  int k_down = 1;
  DownloadMode download_mode = DownloadMode::GlobalCopy;
  DownloadQualification download_qualification = DownloadQualification::CopyTimestamp;

  bool uploads_via_relay() const;
  bool downloads_via_relay() const;

  /// Budgets zeroed for variants that never relay (ASYNC and the two
  /// virtual baselines), inactive directions zeroed for -U/-D.
  VariantSpec normalized() const;

  /// Window/budget sanity against the schedule's delta; throws config_error.
  void validate(Slot delta) const;

  std::string label() const;  // lowercase, file-name friendly
};

/// A check that failed during/after a run. Runs do not abort on these;
/// verification layers assert the list is empty.
struct Violation {
  std::string kind;
  ClientId client = -1;
  Slot slot = -1;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

/// One client's meeting-to-meeting interval with its search-window outcome:
/// whether any semi-qualified upload/download relay was contacted inside the
/// respective window.
struct IntervalRecord {
  ClientId client = 0;
  Slot start = 0;      // meeting slot opening the interval (0 = warm-up)
  Slot end = 0;        // closing meeting slot, or the run horizon
  Slot tau_next = 0;   // scheduled meeting closing the interval
  bool upload_contact = false;
  bool download_contact = false;
};

struct ProtocolEvent {
  enum class Kind { ServerMeeting, UploadExchange, DownloadExchange };
  Kind kind = Kind::ServerMeeting;
  Slot slot = 0;
  ClientId client = 0;   // sender / receiver / meeting client
  ClientId peer = -1;    // relay id for exchanges
  std::string coverage;  // coverage summary moved or delivered
};

std::string to_string(ProtocolEvent::Kind kind);

/// Everything recorded over one run. Staleness traces are indexed
/// [slot][client-1]; upload staleness is (t-1) - phi_i(t), download staleness
/// is t - psi_i(t), both snapshotted after the slot's meetings and exchanges.
struct RunMetrics {
  Slot horizon = 0;
  int n_clients = 0;

  std::vector<double> loss;                          // test loss of x^t
  std::vector<std::vector<Slot>> upload_staleness;   // [slot][client-1]
  std::vector<std::vector<Slot>> download_staleness; // [slot][client-1]
  std::vector<int> upload_exchanges;                 // per slot
  std::vector<int> download_exchanges;               // per slot
  std::vector<int> meetings;                         // per slot
  std::vector<double> shadow_server_dist;            // ||v^t - x^t||
  std::vector<double> shadow_client_dist_max;        // max_i ||v^t - x_i^t||

  std::vector<IntervalRecord> intervals;
  std::vector<Violation> violations;
  std::vector<ProtocolEvent> events;                 // when recorded

  double g_max = 0.0;
  double final_loss = 0.0;
  long long total_upload_exchanges = 0;
  long long total_download_exchanges = 0;
  std::vector<Slot> final_phi;      // per client, after the last slot
  ModelVector final_model;          // server model after the last slot
  long long delivered_steps = 0;    // (origin, step) pairs at the server
  long long computed_steps = 0;     // n_clients * horizon

  // mean ||g_batch - g_full||^2 per client and the max over clients, filled
  // when gradient-variance estimation is on (empirical bounded-variance
  // constant)
  std::vector<double> grad_variance_per_client;
  double sigma_hat = 0.0;

  // test-only captures, filled on request
  std::vector<std::vector<ModelVector>> local_pre_step;       // [slot][client-1]
  std::vector<std::vector<std::vector<double>>> gradient_log; // [client-1][slot]

  Slot upload_staleness_max(Slot t) const;
  double upload_staleness_mean(Slot t) const;
  Slot download_staleness_max(Slot t) const;
  double download_staleness_mean(Slot t) const;
};

struct RunOptions {
  int batch_size = 5;
  bool record_events = false;
  bool record_local_trajectories = false;
  bool record_gradient_log = false;
  bool check_conservation = true;   // payload-vs-log and model reconstruction
  bool check_staleness_bounds = true;   // conditional staleness + shadow bounds
  bool deep_coverage_audit = false; // per-slot global exactly-once scan
  bool estimate_gradient_variance = false;  // costs one full-batch grad per step
  ModelVector initial_model;        // empty -> zero vector
};

/// The idealized instant-delivery model trajectory
/// v^t = x^0 - (1/N) sum_i sum_{s<t} eta g_i^s, maintained incrementally.
struct VirtualShadow {
  ModelVector v;
  void apply(const GradientSample& grad, double eta, int n_clients);
};

/// Per-client (upload, download) staleness of the current state.
std::vector<std::pair<Slot, Slot>> staleness_snapshot(const ServerState& server,
                                                      const std::vector<ClientState>& clients,
                                                      Slot t);

/// (||v - x_server||, per-client ||v - x_i||).
std::pair<double, std::vector<double>> shadow_divergence(const VirtualShadow& shadow,
                                                         const ServerState& server,
                                                         const std::vector<ClientState>& clients);

/// Drive one full run: per slot, server meetings, then peer exchanges, then
/// one local SGD step per client, with the shadow sequence, staleness traces
/// and protocol checks maintained throughout.
RunMetrics run(const SyntheticTask& task, const MeetingSchedule& schedule,
               const PeerContactTrace& contacts, const VariantSpec& variant, double eta,
               Slot horizon, std::uint64_t seed, const RunOptions& opts = {});

}  // namespace fedmobile
