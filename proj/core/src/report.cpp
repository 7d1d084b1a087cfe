#include "fedmobile/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedmobile/analysis.hpp"
#include "fedmobile/errors.hpp"

namespace fedmobile {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot write file: " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw config_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string metrics_to_csv(const RunMetrics& m, const std::string& cfg_hash) {
  std::ostringstream out;
  out << "# config_hash=" << cfg_hash << "\n";
  out << "slot,loss,upload_staleness_max,upload_staleness_mean,download_staleness_max,"
         "download_staleness_mean,upload_exchanges,download_exchanges,server_meetings\n";
  for (Slot t = 0; t < m.horizon; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    out << t << "," << format_double(m.loss[ti]) << "," << m.upload_staleness_max(t) << ","
        << format_double(m.upload_staleness_mean(t)) << "," << m.download_staleness_max(t)
        << "," << format_double(m.download_staleness_mean(t)) << ","
        << m.upload_exchanges[ti] << "," << m.download_exchanges[ti] << "," << m.meetings[ti]
        << "\n";
  }
  return out.str();
}

std::string run_summary_json(const RunMetrics& m, const VariantConfig& variant,
                             std::uint64_t seed, Slot delta, const std::string& cfg_hash) {
  nlohmann::json j;
  j["config_hash"] = cfg_hash;
  j["variant"] = variant.name;
  j["kind"] = to_string(variant.spec.kind);
  j["seed"] = seed;
  j["horizon"] = m.horizon;
  j["final_loss"] = m.final_loss;
  j["g_max"] = m.g_max;
  if (!m.grad_variance_per_client.empty()) {
    j["sigma_hat"] = m.sigma_hat;
    j["grad_variance_per_client"] = m.grad_variance_per_client;
  }
  j["delta"] = delta;
  const VariantSpec v = variant.spec.normalized();
  if (v.uploads_via_relay())
    j["upload_staleness_bound"] =
        upload_staleness_bound(v.upload_window.lo, v.upload_window.hi, delta);
  if (v.downloads_via_relay())
    j["download_staleness_bound"] =
        download_staleness_bound(v.download_window.lo, v.download_window.hi, delta);
  j["total_upload_exchanges"] = m.total_upload_exchanges;
  j["total_download_exchanges"] = m.total_download_exchanges;
  {
    long long up = 0, down = 0;
    for (const IntervalRecord& rec : m.intervals) {
      up += rec.upload_contact ? 1 : 0;
      down += rec.download_contact ? 1 : 0;
    }
    j["intervals"] = m.intervals.size();
    j["intervals_with_upload_contact"] = up;
    j["intervals_with_download_contact"] = down;
  }
  j["violations"] = nlohmann::json::array();
  for (const Violation& viol : m.violations) {
    j["violations"].push_back({{"kind", viol.kind},
                               {"client", viol.client},
                               {"slot", viol.slot},
                               {"value", viol.value},
                               {"bound", viol.bound},
                               {"detail", viol.detail}});
  }
  return j.dump(2) + "\n";
}

std::string events_to_csv(const RunMetrics& m, const std::string& cfg_hash) {
  std::ostringstream out;
  out << "# config_hash=" << cfg_hash << "\n";
  out << "slot,event,client,peer,coverage\n";
  for (const ProtocolEvent& e : m.events) {
    out << e.slot << "," << to_string(e.kind) << "," << e.client << "," << e.peer << ",\""
        << e.coverage << "\"\n";
  }
  return out.str();
}

std::string task_to_csv(const SyntheticTask& task, const std::string& cfg_hash) {
  std::ostringstream out;
  out << "# config_hash=" << cfg_hash << "\n";
  out << "record,client,values...\n";
  out << "meta," << task.n_clients << "," << task.d << "," << task.n_per_client << ","
      << format_double(task.noise_std) << "," << task.n_test << "\n";
  auto emit_row = [&](const char* tag, int client, const double* features, double label) {
    out << tag << "," << client;
    for (int k = 0; k < task.d; ++k) out << "," << format_double(features[k]);
    out << "," << format_double(label) << "\n";
  };
  out << "w_true,0";
  for (double w : task.w_true) out << "," << format_double(w);
  out << "\n";
  for (int c = 1; c <= task.n_clients; ++c) {
    const auto& flat = task.features[static_cast<std::size_t>(c - 1)];
    const auto& labels = task.labels[static_cast<std::size_t>(c - 1)];
    for (int r = 0; r < task.n_per_client; ++r)
      emit_row("train", c, flat.data() + static_cast<std::size_t>(r) * task.d,
               labels[static_cast<std::size_t>(r)]);
  }
  for (int r = 0; r < task.n_test; ++r)
    emit_row("test", 0, task.test_features.data() + static_cast<std::size_t>(r) * task.d,
             task.test_labels[static_cast<std::size_t>(r)]);
  return out.str();
}

SyntheticTask task_from_csv(const std::string& text) {
  SyntheticTask task;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("record,", 0) == 0) continue;
    std::istringstream row(line);
    std::string tag, tok;
    std::getline(row, tag, ',');
    std::getline(row, tok, ',');
    const int client = std::stoi(tok);
    std::vector<double> vals;
    while (std::getline(row, tok, ',')) vals.push_back(std::stod(tok));
    if (tag == "meta") {
      if (vals.size() != 4) throw config_error("task csv: malformed meta row");
      task.n_clients = client;  // first field after tag was n_clients
      task.d = static_cast<int>(vals[0]);
      task.n_per_client = static_cast<int>(vals[1]);
      task.noise_std = vals[2];
      task.n_test = static_cast<int>(vals[3]);
      task.features.resize(static_cast<std::size_t>(task.n_clients));
      task.labels.resize(static_cast<std::size_t>(task.n_clients));
    } else if (tag == "w_true") {
      task.w_true = std::move(vals);
    } else if (tag == "train") {
      if (client < 1 || client > task.n_clients || vals.size() != static_cast<std::size_t>(task.d) + 1)
        throw config_error("task csv: malformed train row");
      auto& flat = task.features[static_cast<std::size_t>(client - 1)];
      flat.insert(flat.end(), vals.begin(), vals.end() - 1);
      task.labels[static_cast<std::size_t>(client - 1)].push_back(vals.back());
    } else if (tag == "test") {
      if (vals.size() != static_cast<std::size_t>(task.d) + 1)
        throw config_error("task csv: malformed test row");
      task.test_features.insert(task.test_features.end(), vals.begin(), vals.end() - 1);
      task.test_labels.push_back(vals.back());
    } else {
      throw config_error("task csv: unknown record tag: " + tag);
    }
  }
  if (task.n_clients == 0 || task.w_true.empty())
    throw config_error("task csv: missing meta or w_true rows");
  return task;
}

std::string sweep_to_csv(const std::string& axis, const std::vector<SweepRow>& rows,
                         const std::string& cfg_hash) {
  std::ostringstream out;
  out << "# config_hash=" << cfg_hash << "\n";
  out << axis << ",slot,mean_loss,std_loss\n";
  for (const SweepRow& r : rows) {
    out << r.axis_value << "," << r.slot << "," << format_double(r.mean_loss) << ","
        << format_double(r.std_loss) << "\n";
  }
  return out.str();
}

}  // namespace fedmobile
