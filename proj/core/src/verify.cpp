#include "fedmobile/verify.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "fedmobile/analysis.hpp"
#include "fedmobile/errors.hpp"
#include "fedmobile/experiments.hpp"
#include "fedmobile/report.hpp"

namespace fedmobile {

namespace {

// Small-but-representative setup shared by the run-based suites.
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.task = {30, 20, 20, 0.1, 5, 0.01};  // d, n_clients, n_per_client, noise, batch, eta
  cfg.schedule.kind = ScheduleConfig::Kind::Fixed;
  cfg.schedule.interval = 20;
  cfg.rho = 1.0;
  cfg.horizon = 240;
  cfg.seeds = {11};
  cfg.variants = default_variants();
  for (auto& vc : cfg.variants) {
    vc.spec.upload_window = {8, 12};
    vc.spec.download_window = {8, 12};
  }
  cfg.validate();
  return cfg;
}

std::string describe_violations(const RunMetrics& m, std::size_t limit = 3) {
  std::ostringstream out;
  out << m.violations.size() << " violation(s)";
  for (std::size_t k = 0; k < std::min(limit, m.violations.size()); ++k) {
    const Violation& v = m.violations[k];
    out << "; " << v.kind << " client=" << v.client << " slot=" << v.slot
        << " value=" << v.value << " bound=" << v.bound;
  }
  return out.str();
}

SuiteResult suite_conservation() {
  SuiteResult res{"conservation", true, {}};
  ExperimentConfig cfg = small_config();
  {
    VariantConfig multi;
    multi.name = "fedmobile_k3";
    multi.spec.kind = VariantKind::FedMobile;
    multi.spec.upload_window = {8, 12};
    multi.spec.download_window = {8, 12};
    multi.spec.k_up = 3;
    multi.spec.k_down = 2;
    cfg.variants.push_back(multi);
  }
  for (const VariantConfig& vc : cfg.variants) {
    const RunMetrics m = run_variant(cfg, vc.spec, cfg.seeds[0]);
    bool clean = true;
    for (const Violation& v : m.violations)
      if (v.kind == "conservation" || v.kind == "clu-payload-mismatch") clean = false;
    if (!clean) {
      res.passed = false;
      res.details.push_back(vc.name + ": " + describe_violations(m));
    } else {
      res.details.push_back(vc.name + ": server model matches gradient-log reconstruction");
    }
  }
  return res;
}

SuiteResult suite_exactly_once() {
  SuiteResult res{"exactly_once", true, {}};
  ExperimentConfig cfg = small_config();
  VariantSpec multi;
  multi.kind = VariantKind::FedMobile;
  multi.upload_window = {8, 12};
  multi.download_window = {8, 12};
  multi.k_up = 3;
  multi.k_down = 2;
  RunOptions opts;
  opts.deep_coverage_audit = true;
  try {
    const RunMetrics m = run_variant(cfg, multi, cfg.seeds[0], opts);
    res.details.push_back("chained-relay run: " + std::to_string(m.delivered_steps) +
                          " steps delivered once, " + std::to_string(m.computed_steps) +
                          " computed");
    if (m.delivered_steps > m.computed_steps) {
      res.passed = false;
      res.details.push_back("delivered more steps than computed");
    }
  } catch (const protocol_violation& pv) {
    res.passed = false;
    res.details.push_back(std::string("coverage audit tripped: ") + pv.what());
  }
  return res;
}

SuiteResult suite_staleness_bounds() {
  SuiteResult res{"staleness_bounds", true, {}};
  ExperimentConfig cfg;
  cfg.task = {50, 50, 20, 0.1, 5, 0.01};
  cfg.schedule.kind = ScheduleConfig::Kind::Fixed;
  cfg.schedule.interval = 50;
  cfg.rho = 1.0;
  cfg.horizon = 1000;
  cfg.seeds = {3};
  cfg.variants = default_variants();
  cfg.validate();

  for (SearchWindow w : {SearchWindow{25, 25}, SearchWindow{20, 30}}) {
    VariantSpec v;
    v.kind = VariantKind::FedMobile;
    v.upload_window = w;
    v.download_window = w;
    const RunMetrics m = run_variant(cfg, v, cfg.seeds[0]);
    long long up_flagged = 0, down_flagged = 0;
    for (const IntervalRecord& rec : m.intervals) {
      up_flagged += rec.upload_contact ? 1 : 0;
      down_flagged += rec.download_contact ? 1 : 0;
    }
    std::ostringstream line;
    line << "window [" << w.lo << "," << w.hi << "]: C=D="
         << upload_staleness_bound(w.lo, w.hi, cfg.delta()) << ", flagged intervals up/down="
         << up_flagged << "/" << down_flagged;
    if (!m.violations.empty()) {
      res.passed = false;
      line << ", " << describe_violations(m);
    } else {
      line << ", zero violations";
    }
    res.details.push_back(line.str());
  }
  return res;
}

SuiteResult suite_bound_scan(const std::filesystem::path& out_dir) {
  SuiteResult res{"bound_scan", true, {}};
  const BoundScanReport rep = staleness_bound_scan(50);
  res.passed = rep.ok() && rep.pairs_scanned == 1326 && rep.min_upload == 25 &&
               rep.min_download == 25;
  std::ostringstream line;
  line << "delta=50: " << rep.pairs_scanned << " pairs scanned per direction, min C="
       << rep.min_upload << " min D=" << rep.min_download << " at (" << rep.argmin_lo << ","
       << rep.argmin_hi << "), " << rep.violations.size() << " counterexamples";
  res.details.push_back(line.str());
  for (const auto& v : rep.violations)
    res.details.push_back("counterexample: " + v.what + " at (" + std::to_string(v.lo) + "," +
                          std::to_string(v.hi) + ")");
  if (!out_dir.empty()) {
    nlohmann::json j;
    j["delta"] = rep.delta;
    j["pairs_scanned"] = rep.pairs_scanned;
    j["min_upload"] = rep.min_upload;
    j["min_download"] = rep.min_download;
    j["argmin"] = {rep.argmin_lo, rep.argmin_hi};
    j["counterexamples"] = rep.violations.size();
    write_text_atomic(out_dir / "bound_scan.json", j.dump(2) + "\n");
  }
  return res;
}

SuiteResult suite_relay_probability(const std::filesystem::path& out_dir) {
  SuiteResult res{"relay_probability", true, {}};
  const ScheduleFamily family = ScheduleFamily::fixed(50);
  const long long trials = 20000;
  std::ostringstream csv;
  csv << "kind,rho,window_lo,window_hi,q_estimate,q_analytic,std_error\n";
  std::uint64_t probe = 0;
  for (RelayKind kind : {RelayKind::Upload, RelayKind::Download}) {
    for (double rho : {0.1, 0.3, 0.7}) {
      for (SearchWindow w : {SearchWindow{20, 30}, SearchWindow{10, 40}, SearchWindow{0, 50}}) {
        const double analytic = relay_probability_analytic(kind, family, rho, w);
        const MonteCarloEstimate mc =
            relay_probability_monte_carlo(kind, family, rho, w, trials, 9000 + probe);
        ++probe;
        const double gap = std::abs(mc.estimate - analytic);
        const bool ok = gap <= 3.0 * mc.std_error;
        if (!ok) res.passed = false;
        std::ostringstream line;
        line << (kind == RelayKind::Upload ? "upload" : "download") << " rho=" << rho
             << " window=[" << w.lo << "," << w.hi << "]: mc=" << mc.estimate
             << " analytic=" << analytic << " se=" << mc.std_error << (ok ? "" : "  MISMATCH");
        res.details.push_back(line.str());
        csv << (kind == RelayKind::Upload ? "upload" : "download") << "," << rho << "," << w.lo
            << "," << w.hi << "," << format_double(mc.estimate) << ","
            << format_double(analytic) << "," << format_double(mc.std_error) << "\n";
      }
    }
  }
  if (!out_dir.empty()) write_text_atomic(out_dir / "relay_probability_grid.csv", csv.str());
  return res;
}

SuiteResult suite_rho_zero() {
  SuiteResult res{"rho_zero", true, {}};
  ExperimentConfig cfg = small_config();
  cfg.rho = 0.0;
  VariantSpec fm;
  fm.kind = VariantKind::FedMobile;
  fm.upload_window = {8, 12};
  fm.download_window = {8, 12};
  VariantSpec async;
  async.kind = VariantKind::Async;
  const RunMetrics a = run_variant(cfg, fm, cfg.seeds[0]);
  const RunMetrics b = run_variant(cfg, async, cfg.seeds[0]);
  const bool identical =
      a.loss.size() == b.loss.size() &&
      std::memcmp(a.loss.data(), b.loss.data(), a.loss.size() * sizeof(double)) == 0;
  res.passed = identical && a.total_upload_exchanges == 0 && a.total_download_exchanges == 0;
  res.details.push_back(identical ? "FEDMOBILE(rho=0) loss trajectory bit-identical to ASYNC"
                                  : "trajectories differ");
  return res;
}

// Negative control: a skipped RESET (re-delivered coverage) must trip the
// exactly-once accounting.
SuiteResult suite_fault_injection() {
  SuiteResult res{"fault_injection", true, {}};

  ClientState sender, relay;
  sender.upload_budget_left = 1;
  for (Slot s = 0; s < 5; ++s) {
    GradientSample g;
    g.vector = {1.0, 2.0};
    g.client = 1;
    g.step_index = s;
    accumulate_clu(sender, g, 0.1);
  }
  const CluChunk kept = sender.clu;  // fault: sender keeps its CLU post-exchange
  exchange_upload(sender, relay);
  sender.clu = kept;

  ServerState server;
  server.global_model = {0.0, 0.0};
  bool detected = false;
  try {
    server_meeting(relay, server, 10, 2, 1, 1);
    server_meeting(sender, server, 12, 2, 1, 1);
  } catch (const protocol_violation& pv) {
    detected = std::string(pv.what()).find("duplicate-delivery") != std::string::npos;
    res.details.push_back(std::string("detected: ") + pv.what());
  }
  if (!detected) {
    res.passed = false;
    res.details.push_back("skipped RESET was NOT detected");
  }

  bool dup_step = false;
  try {
    GradientSample g;
    g.vector = {1.0, 2.0};
    g.client = 1;
    g.step_index = 0;
    ClientState c;
    accumulate_clu(c, g, 0.1);
    accumulate_clu(c, g, 0.1);
  } catch (const protocol_violation& pv) {
    dup_step = std::string(pv.what()).find("duplicate-step") != std::string::npos;
  }
  if (!dup_step) {
    res.passed = false;
    res.details.push_back("duplicate accumulation was NOT detected");
  } else {
    res.details.push_back("detected: duplicate-step on re-accumulated gradient");
  }
  return res;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"conservation", "exactly_once",      "staleness_bounds",   "bound_scan",
          "relay_probability", "rho_zero",     "fault_injection"};
}

SuiteResult run_verify_suite(const std::string& name, const std::filesystem::path& out_dir) {
  if (name == "conservation") return suite_conservation();
  if (name == "exactly_once") return suite_exactly_once();
  if (name == "staleness_bounds") return suite_staleness_bounds();
  if (name == "bound_scan") return suite_bound_scan(out_dir);
  if (name == "relay_probability") return suite_relay_probability(out_dir);
  if (name == "rho_zero") return suite_rho_zero();
  if (name == "fault_injection") return suite_fault_injection();
  throw config_error("unknown verify suite: " + name);
}

std::vector<SuiteResult> run_all_verify_suites(const std::filesystem::path& out_dir) {
  std::vector<SuiteResult> out;
  for (const std::string& name : verify_suite_names())
    out.push_back(run_verify_suite(name, out_dir));
  return out;
}

}  // namespace fedmobile
