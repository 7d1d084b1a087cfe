#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedmobile/config.hpp"
#include "fedmobile/simulator.hpp"

namespace fedmobile {

/// Shortest round-trip decimal form; identical across reruns.
std::string format_double(double v);

/// Write via temp file + rename so concurrent writers never interleave.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Per-slot metrics, one row per slot. First line is a config-hash comment,
/// second the header.
std::string metrics_to_csv(const RunMetrics& m, const std::string& cfg_hash);

/// JSON run summary: final loss, bound constants, relay totals, violations.
std::string run_summary_json(const RunMetrics& m, const VariantConfig& variant,
                             std::uint64_t seed, Slot delta, const std::string& cfg_hash);

std::string events_to_csv(const RunMetrics& m, const std::string& cfg_hash);

struct SweepRow {
  std::string axis_value;
  Slot slot = 0;
  double mean_loss = 0.0;
  double std_loss = 0.0;
};

std::string sweep_to_csv(const std::string& axis, const std::vector<SweepRow>& rows,
                         const std::string& cfg_hash);

/// Full dataset dump for cross-implementation regression; values round-trip
/// exactly through task_from_csv.
std::string task_to_csv(const SyntheticTask& task, const std::string& cfg_hash);
SyntheticTask task_from_csv(const std::string& text);

}  // namespace fedmobile
