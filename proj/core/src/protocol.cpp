#include "fedmobile/protocol.hpp"

#include <algorithm>
#include <sstream>

#include "fedmobile/errors.hpp"
#include "fedmobile/vec.hpp"

namespace fedmobile {

namespace {

// Insert r into a sorted disjoint non-adjacent range list; coalesce with
// neighbours; report any overlap through `dup`.
void insert_range(std::vector<StepRange>& list, StepRange r, ClientId origin,
                  const char* dup) {
  if (r.lo > r.hi)
    throw protocol_violation("empty step range for origin " + std::to_string(origin));
  auto it = std::lower_bound(list.begin(), list.end(), r,
                             [](const StepRange& a, const StepRange& b) { return a.lo < b.lo; });
  if (it != list.end() && it->lo <= r.hi)
    throw protocol_violation(std::string(dup) + ": origin " + std::to_string(origin) +
                                 " steps " + std::to_string(r.lo) + "-" + std::to_string(r.hi) +
                                 " overlap " + std::to_string(it->lo) + "-" +
                                 std::to_string(it->hi),
                             r.lo, origin);
  if (it != list.begin()) {
    auto prev = std::prev(it);
    if (prev->hi >= r.lo)
      throw protocol_violation(std::string(dup) + ": origin " + std::to_string(origin) +
                                   " steps " + std::to_string(r.lo) + "-" +
                                   std::to_string(r.hi) + " overlap " +
                                   std::to_string(prev->lo) + "-" + std::to_string(prev->hi),
                               r.lo, origin);
    if (prev->hi + 1 == r.lo) {  // coalesce left
      prev->hi = r.hi;
      if (it != list.end() && it->lo == r.hi + 1) {  // and right
        prev->hi = it->hi;
        list.erase(it);
      }
      return;
    }
  }
  if (it != list.end() && it->lo == r.hi + 1) {  // coalesce right
    it->lo = r.lo;
    return;
  }
  list.insert(it, r);
}

}  // namespace

void CoverageSet::add_step(ClientId origin, Slot step) {
  insert_range(ranges_[origin], StepRange{step, step}, origin, "duplicate-step");
}

void CoverageSet::add_range(ClientId origin, StepRange r) {
  insert_range(ranges_[origin], r, origin, "duplicate-delivery");
}

void CoverageSet::merge_from(const CoverageSet& other) {
  for (const auto& [origin, list] : other.ranges_)
    for (const StepRange& r : list) add_range(origin, r);
}

Slot CoverageSet::prefix_end(ClientId origin) const {
  auto it = ranges_.find(origin);
  if (it == ranges_.end() || it->second.empty() || it->second.front().lo != 0) return -1;
  return it->second.front().hi;
}

long long CoverageSet::total_steps() const {
  long long n = 0;
  for (const auto& [origin, list] : ranges_)
    for (const StepRange& r : list) n += r.hi - r.lo + 1;
  return n;
}

bool CoverageSet::overlaps(const CoverageSet& other) const {
  for (const auto& [origin, list] : ranges_) {
    auto it = other.ranges_.find(origin);
    if (it == other.ranges_.end()) continue;
    for (const StepRange& a : list)
      for (const StepRange& b : it->second)
        if (a.lo <= b.hi && b.lo <= a.hi) return true;
  }
  return false;
}

std::string CoverageSet::summary() const {
  std::ostringstream out;
  bool first_origin = true;
  for (const auto& [origin, list] : ranges_) {
    if (!first_origin) out << ";";
    first_origin = false;
    out << origin << ":";
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (k) out << ",";
      out << list[k].lo << "-" << list[k].hi;
    }
  }
  return out.str();
}

void CluChunk::clear() {
  std::fill(payload.begin(), payload.end(), 0.0);
  coverage.clear();
}

void accumulate_clu(ClientState& state, const GradientSample& grad, double eta) {
  auto& clu = state.clu;
  if (clu.payload.empty()) clu.payload.assign(grad.vector.size(), 0.0);
  clu.coverage.add_step(grad.client, grad.step_index);
  axpy(eta, grad.vector, clu.payload);
}

bool upload_semi_qualified(Slot sender_tau_last, Slot relay_tau_next, SearchWindow w) {
  return relay_tau_next <= sender_tau_last + w.hi;
}

bool upload_relay_decision(const ClientState& sender, Slot sender_tau_next,
                           Slot relay_tau_next, Slot t, SearchWindow w) {
  const Slot tau_last = sender.last_server_meeting;
  return t >= tau_last + w.lo && t <= tau_last + w.hi &&
         upload_semi_qualified(tau_last, relay_tau_next, w) &&
         relay_tau_next < sender_tau_next && sender.upload_budget_left > 0;
}

void exchange_upload(ClientState& sender, ClientState& relay) {
  if (sender.upload_budget_left <= 0)
    throw protocol_violation("exchange_upload without remaining budget");
  if (!sender.clu.empty()) {
    if (relay.clu.payload.empty()) relay.clu.payload.assign(sender.clu.payload.size(), 0.0);
    relay.clu.coverage.merge_from(sender.clu.coverage);
    axpy(1.0, sender.clu.payload, relay.clu.payload);
    sender.clu.clear();
  }
  sender.upload_budget_left -= 1;
}

bool download_semi_qualified(Slot receiver_tau_next, Slot relay_freshness, SearchWindow w) {
  return relay_freshness >= receiver_tau_next - w.hi;
}

bool download_relay_decision(const ClientState& receiver, Slot receiver_tau_next,
                             const ClientState& relay, Slot t, SearchWindow w,
                             DownloadQualification qual) {
  const bool use_psi = qual == DownloadQualification::CopyTimestamp;
  const Slot relay_fresh = use_psi ? relay.psi : relay.last_server_meeting;
  const Slot receiver_fresh = use_psi ? receiver.psi : receiver.last_server_meeting;
  return t >= receiver_tau_next - w.hi && t <= receiver_tau_next - w.lo &&
         download_semi_qualified(receiver_tau_next, relay_fresh, w) &&
         relay_fresh > receiver_fresh && receiver.download_budget_left > 0;
}

void exchange_download(ClientState& receiver, const ClientState& relay, DownloadMode mode) {
  if (receiver.download_budget_left <= 0)
    throw protocol_violation("exchange_download without remaining budget");
  if (mode == DownloadMode::GlobalCopy) {
    receiver.local_model = relay.global_copy;
    receiver.global_copy = relay.global_copy;
  } else {
    receiver.local_model = relay.local_model;
  }
  receiver.psi = relay.psi;
  receiver.download_budget_left -= 1;
}

void server_meeting_batch(std::span<ClientState*> clients, ServerState& server, Slot t,
                          int n_clients, int k_up, int k_down) {
  if (clients.empty()) return;

  // One aggregated update for the whole slot: x^t = x^{t-1} - (1/N) sum m_i.
  std::vector<double> total(server.global_model.size(), 0.0);
  for (ClientState* c : clients) {
    if (!c->clu.empty()) {
      server.received_coverage.merge_from(c->clu.coverage);
      axpy(1.0, c->clu.payload, total);
    }
  }
  axpy(-1.0 / static_cast<double>(n_clients), total, server.global_model);
  if (!all_finite(server.global_model)) throw numerical_divergence(t);

  for (ClientState* c : clients) {
    c->clu.clear();
    c->local_model = server.global_model;
    c->global_copy = server.global_model;
    c->psi = t;
    c->upload_budget_left = k_up;
    c->download_budget_left = k_down;
    c->last_server_meeting = t;
  }
}

void server_meeting(ClientState& client, ServerState& server, Slot t, int n_clients,
                    int k_up, int k_down) {
  ClientState* one[] = {&client};
  server_meeting_batch(one, server, t, n_clients, k_up, k_down);
}

}  // namespace fedmobile
