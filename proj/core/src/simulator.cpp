#include "fedmobile/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fedmobile/errors.hpp"
#include "fedmobile/rng.hpp"
#include "fedmobile/vec.hpp"

namespace fedmobile {

std::string to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::Async: return "ASYNC";
    case VariantKind::FedMobileU: return "FEDMOBILE_U";
    case VariantKind::FedMobileD: return "FEDMOBILE_D";
    case VariantKind::FedMobile: return "FEDMOBILE";
    case VariantKind::VirtualU: return "VIRTUAL_U";
    case VariantKind::VirtualD: return "VIRTUAL_D";
  }
  return "?";
}

VariantKind variant_kind_from_string(const std::string& name) {
  for (VariantKind k : {VariantKind::Async, VariantKind::FedMobileU, VariantKind::FedMobileD,
                        VariantKind::FedMobile, VariantKind::VirtualU, VariantKind::VirtualD}) {
    if (to_string(k) == name) return k;
  }
  throw config_error("unknown variant kind: " + name);
}

bool VariantSpec::uploads_via_relay() const {
  return (kind == VariantKind::FedMobile || kind == VariantKind::FedMobileU) && k_up > 0;
}

bool VariantSpec::downloads_via_relay() const {
  return (kind == VariantKind::FedMobile || kind == VariantKind::FedMobileD) && k_down > 0;
}

VariantSpec VariantSpec::normalized() const {
  VariantSpec v = *this;
  switch (kind) {
    case VariantKind::Async:
    case VariantKind::VirtualU:
    case VariantKind::VirtualD:
      v.k_up = 0;
      v.k_down = 0;
      break;
    case VariantKind::FedMobileU: v.k_down = 0; break;
    case VariantKind::FedMobileD: v.k_up = 0; break;
    case VariantKind::FedMobile: break;
  }
  return v;
}

void VariantSpec::validate(Slot delta) const {
  auto check_window = [&](SearchWindow w, const char* which) {
    if (!(0 <= w.lo && w.lo <= w.hi && w.hi <= delta))
      throw config_error(std::string(which) +
                         " window must satisfy 0 <= lo <= hi <= delta (delta=" +
                         std::to_string(delta) + ", got [" + std::to_string(w.lo) + "," +
                         std::to_string(w.hi) + "])");
  };
  if (uploads_via_relay()) check_window(upload_window, "upload");
  if (downloads_via_relay()) check_window(download_window, "download");
  if (k_up < 0 || k_down < 0) throw config_error("relay budgets must be >= 0");
}

std::string VariantSpec::label() const {
  std::string s = to_string(kind);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

std::string to_string(ProtocolEvent::Kind kind) {
  switch (kind) {
    case ProtocolEvent::Kind::ServerMeeting: return "server_meeting";
    case ProtocolEvent::Kind::UploadExchange: return "upload_exchange";
    case ProtocolEvent::Kind::DownloadExchange: return "download_exchange";
  }
  return "?";
}

Slot RunMetrics::upload_staleness_max(Slot t) const {
  const auto& row = upload_staleness[static_cast<std::size_t>(t)];
  return *std::max_element(row.begin(), row.end());
}

double RunMetrics::upload_staleness_mean(Slot t) const {
  const auto& row = upload_staleness[static_cast<std::size_t>(t)];
  return static_cast<double>(std::accumulate(row.begin(), row.end(), Slot{0})) /
         static_cast<double>(row.size());
}

Slot RunMetrics::download_staleness_max(Slot t) const {
  const auto& row = download_staleness[static_cast<std::size_t>(t)];
  return *std::max_element(row.begin(), row.end());
}

double RunMetrics::download_staleness_mean(Slot t) const {
  const auto& row = download_staleness[static_cast<std::size_t>(t)];
  return static_cast<double>(std::accumulate(row.begin(), row.end(), Slot{0})) /
         static_cast<double>(row.size());
}

void VirtualShadow::apply(const GradientSample& grad, double eta, int n_clients) {
  // keep this expression in sync with the instant-delivery path in run()
  axpy(-eta / static_cast<double>(n_clients), grad.vector, v);
}

std::vector<std::pair<Slot, Slot>> staleness_snapshot(const ServerState& server,
                                                      const std::vector<ClientState>& clients,
                                                      Slot t) {
  std::vector<std::pair<Slot, Slot>> out;
  out.reserve(clients.size());
  for (std::size_t k = 0; k < clients.size(); ++k) {
    const Slot phi = server.phi(static_cast<ClientId>(k + 1));
    out.emplace_back((t - 1) - phi, t - clients[k].psi);
  }
  return out;
}

std::pair<double, std::vector<double>> shadow_divergence(const VirtualShadow& shadow,
                                                         const ServerState& server,
                                                         const std::vector<ClientState>& clients) {
  std::vector<double> per_client;
  per_client.reserve(clients.size());
  for (const ClientState& c : clients) per_client.push_back(l2_dist(shadow.v, c.local_model));
  return {l2_dist(shadow.v, server.global_model), std::move(per_client)};
}

namespace {

struct IntervalTrack {
  Slot start = 0;
  Slot tau_next = 0;
  bool upload_contact = false;
  bool download_contact = false;
};

constexpr double kConservationTol = 1e-9;

double rel_dist(const std::vector<double>& a, const std::vector<double>& b) {
  return l2_dist(a, b) / std::max(1.0, l2_norm(b));
}

// Evaluates the conditional staleness bounds over every recorded interval:
// on intervals whose search window contacted a semi-qualified relay, every
// slot's staleness must stay within max{delta - lo, hi}.
void check_interval_bounds(RunMetrics& m, const VariantSpec& v, Slot delta) {
  const Slot c_bound = std::max(delta - v.upload_window.lo, v.upload_window.hi);
  const Slot d_bound = std::max(delta - v.download_window.lo, v.download_window.hi);
  for (const IntervalRecord& rec : m.intervals) {
    const std::size_t ci = static_cast<std::size_t>(rec.client - 1);
    if (v.uploads_via_relay() && rec.upload_contact) {
      for (Slot t = rec.start; t < rec.end; ++t) {
        const Slot stale = m.upload_staleness[static_cast<std::size_t>(t)][ci];
        if (stale > c_bound)
          m.violations.push_back({"upload-staleness-bound", rec.client, t,
                                  static_cast<double>(stale), static_cast<double>(c_bound),
                                  "interval start " + std::to_string(rec.start)});
      }
    }
    if (v.downloads_via_relay() && rec.download_contact) {
      for (Slot t = rec.start; t < rec.end; ++t) {
        const Slot stale = m.download_staleness[static_cast<std::size_t>(t)][ci];
        if (stale > d_bound)
          m.violations.push_back({"download-staleness-bound", rec.client, t,
                                  static_cast<double>(stale), static_cast<double>(d_bound),
                                  "interval start " + std::to_string(rec.start)});
      }
    }
  }
}

// Shadow-sequence bounds with the empirical gradient-norm maximum standing in
// for the second-moment constant. Slots lose the upload (download)
// precondition once an interval's window has passed without a semi-qualified
// contact; the client-model bound additionally requires the whole history up
// to t to satisfy both preconditions.
void check_shadow_bounds(RunMetrics& m, const VariantSpec& v, Slot delta, double eta) {
  const bool up = v.uploads_via_relay();
  const bool down = v.downloads_via_relay();
  if (!up) return;

  const Slot horizon = m.horizon;
  std::vector<char> up_ok(static_cast<std::size_t>(horizon), 1);
  std::vector<char> down_ok(static_cast<std::size_t>(horizon), down ? 1 : 0);
  for (const IntervalRecord& rec : m.intervals) {
    if (up && !rec.upload_contact) {
      const Slot from = std::max<Slot>(rec.start + v.upload_window.hi + 1, rec.start);
      for (Slot t = from; t < std::min(rec.end, horizon); ++t)
        up_ok[static_cast<std::size_t>(t)] = 0;
    }
    if (down && !rec.download_contact) {
      const Slot from = std::max(rec.tau_next - v.download_window.lo + 1, rec.start);
      for (Slot t = from; t < std::min(rec.end, horizon); ++t)
        down_ok[static_cast<std::size_t>(t)] = 0;
    }
  }

  const double c_bound = static_cast<double>(std::max(delta - v.upload_window.lo, v.upload_window.hi));
  const double d_bound = static_cast<double>(std::max(delta - v.download_window.lo, v.download_window.hi));
  const double server_limit = c_bound * eta * m.g_max;
  const double client_limit =
      std::sqrt(3.0 * (2.0 * d_bound * d_bound + c_bound * c_bound)) * eta * m.g_max;

  bool history_ok = true;
  for (Slot t = 0; t < horizon; ++t) {
    const bool slot_ok = up_ok[static_cast<std::size_t>(t)] &&
                         (!down || down_ok[static_cast<std::size_t>(t)]);
    history_ok = history_ok && slot_ok;
    if (up_ok[static_cast<std::size_t>(t)] &&
        m.shadow_server_dist[static_cast<std::size_t>(t)] > server_limit + 1e-12) {
      m.violations.push_back({"shadow-server-bound", -1, t,
                              m.shadow_server_dist[static_cast<std::size_t>(t)], server_limit,
                              ""});
    }
    if (down && history_ok &&
        m.shadow_client_dist_max[static_cast<std::size_t>(t)] > client_limit + 1e-12) {
      m.violations.push_back({"shadow-client-bound", -1, t,
                              m.shadow_client_dist_max[static_cast<std::size_t>(t)],
                              client_limit, ""});
    }
  }
}

}  // namespace

RunMetrics run(const SyntheticTask& task, const MeetingSchedule& schedule,
               const PeerContactTrace& contacts, const VariantSpec& variant, double eta,
               Slot horizon, std::uint64_t seed, const RunOptions& opts) {
  if (schedule.n_clients() != task.n_clients)
    throw config_error("schedule/task client counts differ");
  if (horizon < 1) throw config_error("run: horizon must be >= 1");
  if (schedule.horizon < horizon)
    throw config_error("run: schedule horizon shorter than run horizon");
  if (static_cast<Slot>(contacts.contacts.size()) < horizon)
    throw config_error("run: contact trace shorter than run horizon");
  if (eta <= 0.0) throw config_error("run: eta must be > 0");
  if (opts.batch_size < 1 || opts.batch_size > task.n_per_client)
    throw config_error("run: need 1 <= batch_size <= n_per_client");
  variant.validate(schedule.delta);

  const VariantSpec v = variant.normalized();
  const int n = task.n_clients;
  const int d = task.d;
  const double inv_n = 1.0 / static_cast<double>(n);

  ModelVector x0 = opts.initial_model.empty() ? zeros(static_cast<std::size_t>(d))
                                              : opts.initial_model;
  if (static_cast<int>(x0.size()) != d)
    throw config_error("run: initial model dimension mismatch");

  ServerState server;
  server.global_model = x0;
  std::vector<ClientState> clients(static_cast<std::size_t>(n));
  for (auto& c : clients) {
    c.local_model = x0;
    c.global_copy = x0;
    c.psi = 0;
    c.upload_budget_left = v.k_up;
    c.download_budget_left = v.k_down;
    c.last_server_meeting = 0;
  }

  VirtualShadow shadow{x0};
  ModelVector recon = x0;  // x^0 - (1/N) sum of delivered eta-gradients, from the log

  // Undelivered gradients per client, keyed by step; retained until the
  // covering chunk reaches the server.
  std::vector<std::map<Slot, std::vector<double>>> pending(static_cast<std::size_t>(n));

  RunMetrics m;
  m.horizon = horizon;
  m.n_clients = n;
  m.loss.reserve(static_cast<std::size_t>(horizon));
  m.upload_staleness.reserve(static_cast<std::size_t>(horizon));
  m.download_staleness.reserve(static_cast<std::size_t>(horizon));
  m.upload_exchanges.assign(static_cast<std::size_t>(horizon), 0);
  m.download_exchanges.assign(static_cast<std::size_t>(horizon), 0);
  m.meetings.assign(static_cast<std::size_t>(horizon), 0);
  m.shadow_server_dist.reserve(static_cast<std::size_t>(horizon));
  m.shadow_client_dist_max.reserve(static_cast<std::size_t>(horizon));
  if (opts.record_gradient_log)
    m.gradient_log.assign(static_cast<std::size_t>(n), {});

  std::vector<double> grad_var_accum(
      opts.estimate_gradient_variance ? static_cast<std::size_t>(n) : 0, 0.0);

  std::vector<IntervalTrack> track(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i)
    track[static_cast<std::size_t>(i - 1)] = {0, schedule.tau_next(i, 0), false, false};

  auto close_interval = [&](ClientId i, Slot end) {
    const auto& tr = track[static_cast<std::size_t>(i - 1)];
    m.intervals.push_back(
        {i, tr.start, end, tr.tau_next, tr.upload_contact, tr.download_contact});
  };

  // Verify a delivered chunk's payload against the retained gradients and
  // fold those gradients into the reconstruction model.
  auto deliver_chunk = [&](const CluChunk& chunk, Slot t, ClientId carrier) {
    if (chunk.empty()) return;
    std::vector<double> log_sum(static_cast<std::size_t>(d), 0.0);
    for (const auto& [origin, ranges] : chunk.coverage.ranges()) {
      auto& store = pending[static_cast<std::size_t>(origin - 1)];
      for (const StepRange& r : ranges) {
        for (Slot s = r.lo; s <= r.hi; ++s) {
          auto it = store.find(s);
          if (it == store.end())
            throw protocol_violation("delivered step missing from gradient log: origin " +
                                         std::to_string(origin) + " step " + std::to_string(s),
                                     t, carrier);
          axpy(eta, it->second, log_sum);
          store.erase(it);
        }
      }
    }
    axpy(-inv_n, log_sum, recon);
    if (opts.check_conservation) {
      const double err = rel_dist(chunk.payload, log_sum);
      if (err > kConservationTol)
        m.violations.push_back({"clu-payload-mismatch", carrier, t, err, kConservationTol,
                                chunk.coverage.summary()});
    }
  };

  for (Slot t = 0; t < horizon; ++t) {
    // --- phase 1: direct server meetings ---
    std::vector<ClientState*> meeting;
    std::vector<ClientId> meeting_ids;
    for (int i = 1; i <= n; ++i) {
      if (schedule.is_meeting(i, t)) {
        meeting.push_back(&clients[static_cast<std::size_t>(i - 1)]);
        meeting_ids.push_back(i);
      }
    }
    if (!meeting.empty()) {
      for (std::size_t k = 0; k < meeting.size(); ++k) {
        if (opts.record_events)
          m.events.push_back({ProtocolEvent::Kind::ServerMeeting, t, meeting_ids[k], -1,
                              meeting[k]->clu.coverage.summary()});
        deliver_chunk(meeting[k]->clu, t, meeting_ids[k]);
      }
      server_meeting_batch(meeting, server, t, n, v.k_up, v.k_down);
      m.meetings[static_cast<std::size_t>(t)] = static_cast<int>(meeting.size());
      for (ClientId i : meeting_ids) {
        close_interval(i, t);
        track[static_cast<std::size_t>(i - 1)] = {t, schedule.tau_next(i, t), false, false};
      }
    }

    // --- phase 2: peer exchanges ---
    if (v.uploads_via_relay() || v.downloads_via_relay()) {
      for (const auto& [a, b] : contacts.at(t)) {
        if (a < 1 || b < 1 || a > n || b > n)
          throw config_error("contact trace names unknown client");
        ClientState& ca = clients[static_cast<std::size_t>(a - 1)];
        ClientState& cb = clients[static_cast<std::size_t>(b - 1)];
        const Slot next_a = schedule.tau_next(a, t);
        const Slot next_b = schedule.tau_next(b, t);

        if (v.uploads_via_relay()) {
          auto mark = [&](ClientId i, Slot peer_next) {
            auto& tr = track[static_cast<std::size_t>(i - 1)];
            if (t >= tr.start + v.upload_window.lo && t <= tr.start + v.upload_window.hi &&
                upload_semi_qualified(tr.start, peer_next, v.upload_window))
              tr.upload_contact = true;
          };
          mark(a, next_b);
          mark(b, next_a);
          auto try_upload = [&](ClientId s_id, ClientState& s, Slot s_next, ClientId r_id,
                                ClientState& r, Slot r_next) {
            if (upload_relay_decision(s, s_next, r_next, t, v.upload_window)) {
              if (opts.record_events)
                m.events.push_back({ProtocolEvent::Kind::UploadExchange, t, s_id, r_id,
                                    s.clu.coverage.summary()});
              exchange_upload(s, r);
              m.upload_exchanges[static_cast<std::size_t>(t)] += 1;
            }
          };
          try_upload(a, ca, next_a, b, cb, next_b);
          try_upload(b, cb, next_b, a, ca, next_a);
        }

        if (v.downloads_via_relay()) {
          const bool use_psi =
              v.download_qualification == DownloadQualification::CopyTimestamp;
          auto mark = [&](ClientId i, const ClientState& peer) {
            auto& tr = track[static_cast<std::size_t>(i - 1)];
            const Slot fresh = use_psi ? peer.psi : peer.last_server_meeting;
            if (t >= tr.tau_next - v.download_window.hi &&
                t <= tr.tau_next - v.download_window.lo &&
                download_semi_qualified(tr.tau_next, fresh, v.download_window))
              tr.download_contact = true;
          };
          mark(a, cb);
          mark(b, ca);
          auto try_download = [&](ClientId r_id, ClientState& recv, Slot recv_next,
                                  ClientId p_id, ClientState& peer) {
            if (download_relay_decision(recv, recv_next, peer, t, v.download_window,
                                        v.download_qualification)) {
              exchange_download(recv, peer, v.download_mode);
              m.download_exchanges[static_cast<std::size_t>(t)] += 1;
              if (opts.record_events)
                m.events.push_back({ProtocolEvent::Kind::DownloadExchange, t, r_id, p_id,
                                    "psi=" + std::to_string(recv.psi)});
            }
          };
          try_download(a, ca, next_a, b, cb);
          try_download(b, cb, next_b, a, ca);
        }
      }
    }
    if (v.kind == VariantKind::VirtualD) {
      for (auto& c : clients) {
        c.local_model = server.global_model;
        c.global_copy = server.global_model;
        c.psi = t;
      }
    }

    if (opts.deep_coverage_audit) {
      CoverageSet all = server.received_coverage;
      for (std::size_t k = 0; k < clients.size(); ++k) {
        try {
          all.merge_from(clients[k].clu.coverage);
        } catch (const protocol_violation& pv) {
          throw protocol_violation(std::string("coverage audit: ") + pv.what(), t,
                                   static_cast<ClientId>(k + 1));
        }
      }
    }

    // --- x^t is now fixed: record metrics ---
    m.loss.push_back(global_loss(server.global_model, task));
    {
      auto snap = staleness_snapshot(server, clients, t);
      std::vector<Slot> up_row(static_cast<std::size_t>(n));
      std::vector<Slot> down_row(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        up_row[static_cast<std::size_t>(i)] = snap[static_cast<std::size_t>(i)].first;
        down_row[static_cast<std::size_t>(i)] = snap[static_cast<std::size_t>(i)].second;
      }
      m.upload_staleness.push_back(std::move(up_row));
      m.download_staleness.push_back(std::move(down_row));
    }
    {
      double worst = 0.0;
      for (const ClientState& c : clients)
        worst = std::max(worst, l2_dist(shadow.v, c.local_model));
      m.shadow_server_dist.push_back(l2_dist(shadow.v, server.global_model));
      m.shadow_client_dist_max.push_back(worst);
    }
    if (opts.check_conservation) {
      const double err = rel_dist(server.global_model, recon);
      if (err > kConservationTol)
        m.violations.push_back({"conservation", -1, t, err, kConservationTol, ""});
    }
    if (opts.record_local_trajectories) {
      std::vector<ModelVector> row;
      row.reserve(static_cast<std::size_t>(n));
      for (const ClientState& c : clients) row.push_back(c.local_model);
      m.local_pre_step.push_back(std::move(row));
    }

    // --- phase 3: one local SGD step per client ---
    for (int i = 1; i <= n; ++i) {
      ClientState& c = clients[static_cast<std::size_t>(i - 1)];
      GradientSample g = minibatch_grad(c.local_model, task, i, opts.batch_size,
                                        derive_seed(seed, Stream::Batch,
                                                    static_cast<std::uint64_t>(i),
                                                    static_cast<std::uint64_t>(t)),
                                        t);
      m.g_max = std::max(m.g_max, l2_norm(g.vector));
      if (opts.record_gradient_log)
        m.gradient_log[static_cast<std::size_t>(i - 1)].push_back(g.vector);
      if (opts.estimate_gradient_variance) {
        const GradientSample full =
            minibatch_grad(c.local_model, task, i, task.n_per_client, 0, t);
        const double dev = l2_dist(g.vector, full.vector);
        grad_var_accum[static_cast<std::size_t>(i - 1)] += dev * dev;
      }

      if (v.kind == VariantKind::VirtualU) {
        // instant delivery; same expression as the shadow update so the
        // virtual and real sequences coincide bit-for-bit
        server.received_coverage.add_range(i, {t, t});
        axpy(-eta / static_cast<double>(n), g.vector, server.global_model);
        axpy(-eta / static_cast<double>(n), g.vector, recon);
      } else {
        accumulate_clu(c, g, eta);
        pending[static_cast<std::size_t>(i - 1)].emplace(t, g.vector);
      }
      c.local_model = sgd_step(c.local_model, g, eta);
      shadow.apply(g, eta, n);
    }
  }

  for (int i = 1; i <= n; ++i) close_interval(i, horizon);

  if (opts.check_staleness_bounds) {
    check_interval_bounds(m, v, schedule.delta);
    check_shadow_bounds(m, v, schedule.delta, eta);
  }

  m.final_loss = m.loss.back();
  if (opts.estimate_gradient_variance) {
    m.grad_variance_per_client.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      m.grad_variance_per_client[static_cast<std::size_t>(i)] =
          grad_var_accum[static_cast<std::size_t>(i)] / static_cast<double>(horizon);
    m.sigma_hat = std::sqrt(*std::max_element(m.grad_variance_per_client.begin(),
                                              m.grad_variance_per_client.end()));
  }
  m.final_phi.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) m.final_phi.push_back(server.phi(i));
  m.final_model = server.global_model;
  m.delivered_steps = server.received_coverage.total_steps();
  m.computed_steps = static_cast<long long>(n) * static_cast<long long>(horizon);
  m.total_upload_exchanges =
      std::accumulate(m.upload_exchanges.begin(), m.upload_exchanges.end(), 0LL);
  m.total_download_exchanges =
      std::accumulate(m.download_exchanges.begin(), m.download_exchanges.end(), 0LL);
  return m;
}

}  // namespace fedmobile
