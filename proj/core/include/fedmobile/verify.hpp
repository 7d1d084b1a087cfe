#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fedmobile {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::vector<std::string> details;
};

/// Names accepted by run_verify_suite, in execution order: conservation,
/// exactly_once, staleness_bounds, bound_scan, relay_probability, rho_zero,
/// fault_injection.
std::vector<std::string> verify_suite_names();

/// Runs one named invariant suite. When out_dir is non-empty, suites with
/// tabular results (relay_probability grid, bound scan) also write CSV/JSON
/// artifacts there. Throws config_error for an unknown name.
SuiteResult run_verify_suite(const std::string& name,
                             const std::filesystem::path& out_dir = {});

std::vector<SuiteResult> run_all_verify_suites(const std::filesystem::path& out_dir = {});

}  // namespace fedmobile
