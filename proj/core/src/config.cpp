#include "fedmobile/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedmobile/errors.hpp"

namespace fedmobile {

namespace {

using nlohmann::json;

void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

std::string schedule_kind_name(ScheduleConfig::Kind k) {
  return k == ScheduleConfig::Kind::Fixed ? "fixed" : "random";
}

std::string download_mode_name(DownloadMode m) {
  return m == DownloadMode::GlobalCopy ? "GLOBAL_COPY" : "LOCAL_MODEL";
}

std::string download_qualification_name(DownloadQualification q) {
  return q == DownloadQualification::CopyTimestamp ? "COPY_TIMESTAMP" : "LAST_MEETING";
}

SearchWindow window_from_json(const json& j, const std::string& field) {
  require(j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer(),
          field + ": expected [lo, hi] integer pair");
  return SearchWindow{j[0].get<Slot>(), j[1].get<Slot>()};
}

json window_to_json(SearchWindow w) { return json::array({w.lo, w.hi}); }

VariantConfig variant_from_json(const json& j) {
  require(j.is_object() && j.contains("kind"), "variants[]: each entry needs a \"kind\"");
  VariantConfig vc;
  vc.spec.kind = variant_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("upload_window"))
    vc.spec.upload_window = window_from_json(j["upload_window"], "variants[].upload_window");
  if (j.contains("download_window"))
    vc.spec.download_window =
        window_from_json(j["download_window"], "variants[].download_window");
  if (j.contains("k_up")) vc.spec.k_up = j["k_up"].get<int>();
  if (j.contains("k_down")) vc.spec.k_down = j["k_down"].get<int>();
  if (j.contains("download_mode")) {
    const std::string m = j["download_mode"].get<std::string>();
    if (m == "GLOBAL_COPY") vc.spec.download_mode = DownloadMode::GlobalCopy;
    else if (m == "LOCAL_MODEL") vc.spec.download_mode = DownloadMode::LocalModel;
    else throw config_error("variants[].download_mode: expected GLOBAL_COPY or LOCAL_MODEL");
  }
  if (j.contains("download_qualification")) {
    const std::string q = j["download_qualification"].get<std::string>();
    if (q == "COPY_TIMESTAMP")
      vc.spec.download_qualification = DownloadQualification::CopyTimestamp;
    else if (q == "LAST_MEETING")
      vc.spec.download_qualification = DownloadQualification::LastMeeting;
    else
      throw config_error(
          "variants[].download_qualification: expected COPY_TIMESTAMP or LAST_MEETING");
  }
  vc.name = j.contains("name") ? j["name"].get<std::string>() : vc.spec.label();
  return vc;
}

json variant_to_json(const VariantConfig& vc) {
  json j;
  j["name"] = vc.name;
  j["kind"] = to_string(vc.spec.kind);
  j["upload_window"] = window_to_json(vc.spec.upload_window);
  j["download_window"] = window_to_json(vc.spec.download_window);
  j["k_up"] = vc.spec.k_up;
  j["k_down"] = vc.spec.k_down;
  j["download_mode"] = download_mode_name(vc.spec.download_mode);
  j["download_qualification"] = download_qualification_name(vc.spec.download_qualification);
  return j;
}

std::vector<SearchWindow> windows_from_json(const json& j, const std::string& field) {
  std::vector<SearchWindow> out;
  require(j.is_array(), field + ": expected an array of [lo, hi] pairs");
  for (const auto& e : j) out.push_back(window_from_json(e, field));
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(task.d >= 1, "task.d must be >= 1");
  require(task.n_clients >= 1, "task.n_clients must be >= 1");
  require(task.n_per_client >= 1, "task.n_per_client must be >= 1");
  require(task.noise_std >= 0.0, "task.noise_std must be >= 0");
  require(task.batch_size >= 1 && task.batch_size <= task.n_per_client,
          "task.batch_size must be in [1, n_per_client]");
  require(task.eta > 0.0, "task.eta must be > 0");
  require(task.feature_scale > 0.0, "task.feature_scale must be > 0");
  require(rho >= 0.0 && rho <= 1.0, "rho must be in [0,1]");
  require(horizon >= 1, "horizon must be >= 1");
  require(!seeds.empty(), "seeds must be non-empty");
  if (schedule.kind == ScheduleConfig::Kind::Fixed)
    require(schedule.interval >= 1, "schedule.interval must be >= 1");
  else
    require(schedule.min_gap >= 1 && schedule.min_gap <= schedule.max_gap,
            "schedule: need 1 <= min_gap <= max_gap");

  require(!variants.empty(), "variants must be non-empty");
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto& vc = variants[i];
    require(!vc.name.empty(), "variants[].name must be non-empty");
    for (std::size_t k = 0; k < i; ++k)
      require(variants[k].name != vc.name, "duplicate variant name: " + vc.name);
    try {
      vc.spec.validate(delta());
    } catch (const config_error& e) {
      throw config_error("variant \"" + vc.name + "\": " + e.what());
    }
  }
  // sweep windows are checked against delta when the axis actually runs;
  // the default window lists need not fit every schedule
  for (SearchWindow w : sweep.upload_windows)
    require(0 <= w.lo && w.lo <= w.hi, "sweep.upload_window values must satisfy 0 <= lo <= hi");
  for (SearchWindow w : sweep.download_windows)
    require(0 <= w.lo && w.lo <= w.hi,
            "sweep.download_window values must satisfy 0 <= lo <= hi");
  for (double r : sweep.rhos) require(r >= 0.0 && r <= 1.0, "sweep.rho values must be in [0,1]");
  for (int k : sweep.k_up) require(k >= 1, "sweep.k_up values must be >= 1");
  for (int k : sweep.k_down) require(k >= 1, "sweep.k_down values must be >= 1");
  require(!output_dir.empty(), "output_dir must be non-empty");
}

std::vector<VariantConfig> default_variants() {
  std::vector<VariantConfig> out;
  for (VariantKind k : {VariantKind::Async, VariantKind::VirtualU, VariantKind::VirtualD,
                        VariantKind::FedMobileU, VariantKind::FedMobileD,
                        VariantKind::FedMobile}) {
    VariantConfig vc;
    vc.spec.kind = k;
    vc.name = vc.spec.label();
    out.push_back(vc);
  }
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.variants = default_variants();
  return cfg;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: invalid JSON: ") + e.what());
  }
  require(j.is_object(), "config: top level must be a JSON object");

  ExperimentConfig cfg;
  try {
    if (j.contains("task")) {
      const auto& t = j["task"];
      if (t.contains("d")) cfg.task.d = t["d"].get<int>();
      if (t.contains("n_clients")) cfg.task.n_clients = t["n_clients"].get<int>();
      if (t.contains("n_per_client")) cfg.task.n_per_client = t["n_per_client"].get<int>();
      if (t.contains("noise_std")) cfg.task.noise_std = t["noise_std"].get<double>();
      if (t.contains("batch_size")) cfg.task.batch_size = t["batch_size"].get<int>();
      if (t.contains("eta")) cfg.task.eta = t["eta"].get<double>();
      if (t.contains("feature_scale")) cfg.task.feature_scale = t["feature_scale"].get<double>();
    }
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      if (s.contains("kind")) {
        const std::string k = s["kind"].get<std::string>();
        if (k == "fixed") cfg.schedule.kind = ScheduleConfig::Kind::Fixed;
        else if (k == "random") cfg.schedule.kind = ScheduleConfig::Kind::Random;
        else throw config_error("schedule.kind: expected \"fixed\" or \"random\"");
      }
      if (s.contains("interval")) cfg.schedule.interval = s["interval"].get<Slot>();
      if (s.contains("min_gap")) cfg.schedule.min_gap = s["min_gap"].get<Slot>();
      if (s.contains("max_gap")) cfg.schedule.max_gap = s["max_gap"].get<Slot>();
    }
    if (j.contains("rho")) cfg.rho = j["rho"].get<double>();
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<Slot>();
    if (j.contains("seeds")) {
      cfg.seeds.clear();
      for (const auto& s : j["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
    }
    if (j.contains("variants")) {
      cfg.variants.clear();
      for (const auto& v : j["variants"]) cfg.variants.push_back(variant_from_json(v));
    } else {
      cfg.variants = default_variants();
    }
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      if (s.contains("upload_window"))
        cfg.sweep.upload_windows = windows_from_json(s["upload_window"], "sweep.upload_window");
      if (s.contains("download_window"))
        cfg.sweep.download_windows =
            windows_from_json(s["download_window"], "sweep.download_window");
      if (s.contains("rho")) {
        cfg.sweep.rhos.clear();
        for (const auto& r : s["rho"]) cfg.sweep.rhos.push_back(r.get<double>());
      }
      if (s.contains("k_up")) {
        cfg.sweep.k_up.clear();
        for (const auto& k : s["k_up"]) cfg.sweep.k_up.push_back(k.get<int>());
      }
      if (s.contains("k_down")) {
        cfg.sweep.k_down.clear();
        for (const auto& k : s["k_down"]) cfg.sweep.k_down.push_back(k.get<int>());
      }
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("write_events")) cfg.write_events = j["write_events"].get<bool>();
    if (j.contains("dump_mobility")) cfg.dump_mobility = j["dump_mobility"].get<bool>();
    if (j.contains("dump_task")) cfg.dump_task = j["dump_task"].get<bool>();
    if (j.contains("estimate_gradient_variance"))
      cfg.estimate_gradient_variance = j["estimate_gradient_variance"].get<bool>();
  } catch (const json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("config: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::string canonical_json(const ExperimentConfig& cfg) {
  json j;
  j["task"] = {{"d", cfg.task.d},
               {"n_clients", cfg.task.n_clients},
               {"n_per_client", cfg.task.n_per_client},
               {"noise_std", cfg.task.noise_std},
               {"batch_size", cfg.task.batch_size},
               {"eta", cfg.task.eta},
               {"feature_scale", cfg.task.feature_scale}};
  if (cfg.schedule.kind == ScheduleConfig::Kind::Fixed)
    j["schedule"] = {{"kind", schedule_kind_name(cfg.schedule.kind)},
                     {"interval", cfg.schedule.interval}};
  else
    j["schedule"] = {{"kind", schedule_kind_name(cfg.schedule.kind)},
                     {"min_gap", cfg.schedule.min_gap},
                     {"max_gap", cfg.schedule.max_gap}};
  j["rho"] = cfg.rho;
  j["horizon"] = cfg.horizon;
  j["seeds"] = cfg.seeds;
  j["variants"] = json::array();
  for (const auto& vc : cfg.variants) j["variants"].push_back(variant_to_json(vc));
  json sweep;
  sweep["upload_window"] = json::array();
  for (SearchWindow w : cfg.sweep.upload_windows) sweep["upload_window"].push_back(window_to_json(w));
  sweep["download_window"] = json::array();
  for (SearchWindow w : cfg.sweep.download_windows)
    sweep["download_window"].push_back(window_to_json(w));
  sweep["rho"] = cfg.sweep.rhos;
  sweep["k_up"] = cfg.sweep.k_up;
  sweep["k_down"] = cfg.sweep.k_down;
  j["sweep"] = sweep;
  j["output_dir"] = cfg.output_dir;
  j["write_events"] = cfg.write_events;
  j["dump_mobility"] = cfg.dump_mobility;
  j["dump_task"] = cfg.dump_task;
  j["estimate_gradient_variance"] = cfg.estimate_gradient_variance;
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace fedmobile
