#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "fedmobile/config.hpp"
#include "fedmobile/mobility.hpp"
#include "fedmobile/simulator.hpp"

namespace fedmobile {

/// Inputs for one seed, all derived from (config, seed) alone.
SyntheticTask build_task(const ExperimentConfig& cfg, std::uint64_t seed);
MeetingSchedule build_schedule(const ExperimentConfig& cfg, std::uint64_t seed);
PeerContactTrace build_contacts(const ExperimentConfig& cfg, std::uint64_t seed, double rho);

RunMetrics run_variant(const ExperimentConfig& cfg, const VariantSpec& variant,
                       std::uint64_t seed, const RunOptions& opts = {});

/// `run <config>`: one metrics CSV + JSON summary per (variant, seed) under
/// out_root, plus the resolved config. Returns the produced file count.
int execute_runs(const ExperimentConfig& cfg, const std::filesystem::path& out_root,
                 std::ostream& log);

inline const char* kSweepAxes[] = {"upload_window", "download_window", "rho", "k_up",
                                   "k_down"};

bool is_sweep_axis(const std::string& axis);

/// `sweep <config> --axis <name>`: runs the axis' value list (seeds averaged)
/// and writes one long-format comparison CSV. Independent runs execute in
/// parallel; outputs are deterministic regardless of scheduling.
std::filesystem::path execute_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                    const std::filesystem::path& out_root, std::ostream& log);

/// Mean final loss per axis value, in axis order (computed by execute_sweep;
/// exposed for tests and trend checks).
std::vector<std::pair<std::string, double>> sweep_final_losses(const ExperimentConfig& cfg,
                                                               const std::string& axis);

}  // namespace fedmobile
