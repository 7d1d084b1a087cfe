#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmobile/simulator.hpp"
#include "fedmobile/types.hpp"

namespace fedmobile {

struct TaskConfig {
  int d = 200;
  int n_clients = 50;
  int n_per_client = 40;
  double noise_std = 0.1;
  int batch_size = 5;
  double eta = 0.01;
  // Feature-coordinate standard deviation. The default keeps a 50-slot
  // meeting interval from fully closing a client's local gap at eta = 0.01
  // (eta * batch-Hessian scale ~ d * feature_scale^2), which is the regime
  // where relay timing visibly moves the loss curves.
  double feature_scale = 0.2;
};

struct ScheduleConfig {
  enum class Kind { Fixed, Random };
  Kind kind = Kind::Fixed;
  Slot interval = 50;
  Slot min_gap = 30;
  Slot max_gap = 50;

  /// The meeting-gap bound the schedule kind guarantees.
  Slot delta() const { return kind == Kind::Fixed ? interval : max_gap; }
};

struct VariantConfig {
  std::string name;  // output-file label; defaults to the lowercase kind
  VariantSpec spec;
};

/// Per-axis value lists used by the sweep subcommand.
struct SweepValues {
  std::vector<SearchWindow> upload_windows{{0, 10}, {20, 30}, {40, 50}};
  std::vector<SearchWindow> download_windows{{0, 10}, {20, 30}, {40, 50}};
  std::vector<double> rhos{0.0, 0.2, 0.5, 1.0};
  std::vector<int> k_up{1, 2, 3};
  std::vector<int> k_down{1, 2, 3};
};

/// A fully explicit experiment description; (config, seed) determines every
/// run bit-for-bit.
struct ExperimentConfig {
  TaskConfig task;
  ScheduleConfig schedule;
  double rho = 1.0;
  Slot horizon = 1000;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<VariantConfig> variants;  // empty -> default six benchmark variants
  SweepValues sweep;
  std::string output_dir = "out";
  bool write_events = false;
  bool dump_mobility = false;
  bool dump_task = false;
  bool estimate_gradient_variance = false;

  Slot delta() const { return schedule.delta(); }

  /// Cross-field validation against every module precondition.
  void validate() const;
};

/// The six benchmark variants with the default relay parameters.
std::vector<VariantConfig> default_variants();

ExperimentConfig default_config();

/// Parse + validate. Throws config_error with a field-level message.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

/// Canonical JSON with every default explicit; stable across reruns.
std::string canonical_json(const ExperimentConfig& cfg);

/// FNV-1a over the canonical JSON, as a hex string; stamped into outputs.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace fedmobile
