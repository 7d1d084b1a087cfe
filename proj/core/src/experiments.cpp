#include "fedmobile/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "fedmobile/errors.hpp"
#include "fedmobile/report.hpp"
#include "fedmobile/rng.hpp"

namespace fedmobile {

SyntheticTask build_task(const ExperimentConfig& cfg, std::uint64_t seed) {
  return gen_synthetic(cfg.task.n_clients, cfg.task.d, cfg.task.n_per_client,
                       cfg.task.noise_std, seed, 500, cfg.task.feature_scale);
}

MeetingSchedule build_schedule(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.schedule.kind == ScheduleConfig::Kind::Fixed)
    return gen_fixed_interval_schedule(cfg.task.n_clients, cfg.schedule.interval, cfg.horizon);
  return gen_random_interval_schedule(cfg.task.n_clients, cfg.schedule.min_gap,
                                      cfg.schedule.max_gap, cfg.horizon, seed);
}

PeerContactTrace build_contacts(const ExperimentConfig& cfg, std::uint64_t seed, double rho) {
  return gen_peer_contacts(cfg.task.n_clients, rho, cfg.horizon, seed);
}

RunMetrics run_variant(const ExperimentConfig& cfg, const VariantSpec& variant,
                       std::uint64_t seed, const RunOptions& opts) {
  RunOptions o = opts;
  o.batch_size = cfg.task.batch_size;
  const SyntheticTask task = build_task(cfg, seed);
  const MeetingSchedule schedule = build_schedule(cfg, seed);
  const PeerContactTrace contacts = build_contacts(cfg, seed, cfg.rho);
  return run(task, schedule, contacts, variant, cfg.task.eta, cfg.horizon, seed, o);
}

int execute_runs(const ExperimentConfig& cfg, const std::filesystem::path& out_root,
                 std::ostream& log) {
  const std::string hash = config_hash(cfg);
  int files = 0;

  write_text_atomic(out_root / "config_resolved.json", canonical_json(cfg) + "\n");
  ++files;

  for (std::uint64_t seed : cfg.seeds) {
    const SyntheticTask task = build_task(cfg, seed);
    const MeetingSchedule schedule = build_schedule(cfg, seed);
    const PeerContactTrace contacts = build_contacts(cfg, seed, cfg.rho);
    if (cfg.dump_mobility) {
      write_text_atomic(out_root / ("schedule_s" + std::to_string(seed) + ".txt"),
                        schedule.to_text());
      write_text_atomic(out_root / ("contacts_s" + std::to_string(seed) + ".txt"),
                        contacts.to_text());
      files += 2;
    }
    if (cfg.dump_task) {
      write_text_atomic(out_root / ("task_s" + std::to_string(seed) + ".csv"),
                        task_to_csv(task, hash));
      ++files;
    }
    for (const VariantConfig& vc : cfg.variants) {
      RunOptions opts;
      opts.batch_size = cfg.task.batch_size;
      opts.record_events = cfg.write_events;
      opts.estimate_gradient_variance = cfg.estimate_gradient_variance;
      const RunMetrics m =
          run(task, schedule, contacts, vc.spec, cfg.task.eta, cfg.horizon, seed, opts);

      const std::string stem = vc.name + "_s" + std::to_string(seed);
      write_text_atomic(out_root / (stem + ".csv"), metrics_to_csv(m, hash));
      write_text_atomic(out_root / (stem + ".json"),
                        run_summary_json(m, vc, seed, cfg.delta(), hash));
      files += 2;
      if (cfg.write_events) {
        write_text_atomic(out_root / (stem + "_events.csv"), events_to_csv(m, hash));
        ++files;
      }
      log << stem << ": final_loss=" << format_double(m.final_loss)
          << " relays=" << m.total_upload_exchanges << "/" << m.total_download_exchanges
          << (m.violations.empty() ? "" : " VIOLATIONS=" + std::to_string(m.violations.size()))
          << "\n";
    }
  }
  return files;
}

bool is_sweep_axis(const std::string& axis) {
  for (const char* a : kSweepAxes)
    if (axis == a) return true;
  return false;
}

namespace {

struct SweepCell {
  std::string label;
  VariantSpec variant;
  double rho = -1.0;  // <0: use cfg.rho
};

std::string window_label(SearchWindow w) {
  return std::to_string(w.lo) + "-" + std::to_string(w.hi);
}

// The swept variant inherits windows/budgets from the config's variant of the
// matching kind when one is configured.
VariantSpec base_variant(const ExperimentConfig& cfg, VariantKind kind) {
  for (const VariantConfig& vc : cfg.variants)
    if (vc.spec.kind == kind) return vc.spec;
  VariantSpec v;
  v.kind = kind;
  return v;
}

std::vector<SweepCell> sweep_cells(const ExperimentConfig& cfg, const std::string& axis) {
  std::vector<SweepCell> cells;
  if (axis == "upload_window") {
    for (SearchWindow w : cfg.sweep.upload_windows) {
      VariantSpec v = base_variant(cfg, VariantKind::FedMobileU);
      v.upload_window = w;
      cells.push_back({window_label(w), v, -1.0});
    }
  } else if (axis == "download_window") {
    for (SearchWindow w : cfg.sweep.download_windows) {
      VariantSpec v = base_variant(cfg, VariantKind::FedMobileD);
      v.download_window = w;
      cells.push_back({window_label(w), v, -1.0});
    }
  } else if (axis == "rho") {
    for (double r : cfg.sweep.rhos)
      cells.push_back({format_double(r), base_variant(cfg, VariantKind::FedMobile), r});
  } else if (axis == "k_up") {
    for (int k : cfg.sweep.k_up) {
      VariantSpec v = base_variant(cfg, VariantKind::FedMobile);
      v.k_up = k;
      cells.push_back({std::to_string(k), v, -1.0});
    }
  } else if (axis == "k_down") {
    for (int k : cfg.sweep.k_down) {
      VariantSpec v = base_variant(cfg, VariantKind::FedMobile);
      v.k_down = k;
      cells.push_back({std::to_string(k), v, -1.0});
    }
  } else {
    throw config_error("unknown sweep axis: " + axis);
  }
  for (const SweepCell& c : cells) c.variant.validate(cfg.delta());
  return cells;
}

// All (cell, seed) runs, independent and parallel; results land in a
// pre-sized grid so scheduling order cannot affect output.
std::vector<std::vector<RunMetrics>> run_sweep_grid(const ExperimentConfig& cfg,
                                                    const std::vector<SweepCell>& cells) {
  std::vector<std::vector<RunMetrics>> grid(cells.size());
  std::vector<std::future<RunMetrics>> futures;
  futures.reserve(cells.size() * cfg.seeds.size());
  for (const SweepCell& cell : cells) {
    for (std::uint64_t seed : cfg.seeds) {
      futures.push_back(std::async(std::launch::async, [&cfg, cell, seed]() {
        const SyntheticTask task = build_task(cfg, seed);
        const MeetingSchedule schedule = build_schedule(cfg, seed);
        const double rho = cell.rho < 0.0 ? cfg.rho : cell.rho;
        const PeerContactTrace contacts = build_contacts(cfg, seed, rho);
        RunOptions opts;
        opts.batch_size = cfg.task.batch_size;
        return run(task, schedule, contacts, cell.variant, cfg.task.eta, cfg.horizon, seed,
                   opts);
      }));
    }
  }
  std::size_t idx = 0;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) grid[c].push_back(futures[idx++].get());
  return grid;
}

}  // namespace

std::filesystem::path execute_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                    const std::filesystem::path& out_root, std::ostream& log) {
  const auto cells = sweep_cells(cfg, axis);
  const auto grid = run_sweep_grid(cfg, cells);
  const std::string hash = config_hash(cfg);

  std::vector<SweepRow> rows;
  rows.reserve(cells.size() * static_cast<std::size_t>(cfg.horizon));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (Slot t = 0; t < cfg.horizon; ++t) {
      double mean = 0.0;
      for (const RunMetrics& m : grid[c]) mean += m.loss[static_cast<std::size_t>(t)];
      mean /= static_cast<double>(grid[c].size());
      double var = 0.0;
      for (const RunMetrics& m : grid[c]) {
        const double dlt = m.loss[static_cast<std::size_t>(t)] - mean;
        var += dlt * dlt;
      }
      const double stdev =
          grid[c].size() > 1 ? std::sqrt(var / static_cast<double>(grid[c].size() - 1)) : 0.0;
      rows.push_back({cells[c].label, t, mean, stdev});
    }
    double final_mean = 0.0;
    for (const RunMetrics& m : grid[c]) final_mean += m.final_loss;
    final_mean /= static_cast<double>(grid[c].size());
    log << axis << "=" << cells[c].label
        << ": mean_final_loss=" << format_double(final_mean) << "\n";
  }

  const std::filesystem::path path = out_root / ("sweep_" + axis + ".csv");
  write_text_atomic(path, sweep_to_csv(axis, rows, hash));
  return path;
}

std::vector<std::pair<std::string, double>> sweep_final_losses(const ExperimentConfig& cfg,
                                                               const std::string& axis) {
  const auto cells = sweep_cells(cfg, axis);
  const auto grid = run_sweep_grid(cfg, cells);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double mean = 0.0;
    for (const RunMetrics& m : grid[c]) mean += m.final_loss;
    out.emplace_back(cells[c].label, mean / static_cast<double>(grid[c].size()));
  }
  return out;
}

}  // namespace fedmobile
