#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fedmobile/config.hpp"
#include "fedmobile/errors.hpp"
#include "fedmobile/experiments.hpp"
#include "fedmobile/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerificationFailed = 2;
constexpr int kExitNumericalDivergence = 3;

// Output root: the config's output_dir, re-rooted under FEDMOBILE_OUTPUT_ROOT
// when that is set.
std::filesystem::path resolve_output_root(const std::string& output_dir) {
  if (const char* root = std::getenv("FEDMOBILE_OUTPUT_ROOT"))
    return std::filesystem::path(root) / output_dir;
  return std::filesystem::path(output_dir);
}

int cmd_run(const std::string& config_path) {
  const fedmobile::ExperimentConfig cfg = fedmobile::load_config(config_path);
  const auto out_root = resolve_output_root(cfg.output_dir);
  const int files = fedmobile::execute_runs(cfg, out_root, std::cout);
  std::cout << "wrote " << files << " files under " << out_root.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis) {
  if (!fedmobile::is_sweep_axis(axis))
    throw fedmobile::config_error("unknown sweep axis: " + axis +
                                  " (expected upload_window, download_window, rho, k_up or "
                                  "k_down)");
  const fedmobile::ExperimentConfig cfg = fedmobile::load_config(config_path);
  const auto out_root = resolve_output_root(cfg.output_dir);
  const auto path = fedmobile::execute_sweep(cfg, axis, out_root, std::cout);
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& suite, const std::string& out_dir) {
  std::vector<fedmobile::SuiteResult> results;
  const std::filesystem::path out =
      out_dir.empty() ? std::filesystem::path{} : resolve_output_root(out_dir);
  if (suite.empty()) {
    results = fedmobile::run_all_verify_suites(out);
  } else {
    results.push_back(fedmobile::run_verify_suite(suite, out));
  }
  bool all_ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "\n";
    for (const auto& d : r.details) std::cout << "       " << d << "\n";
    all_ok = all_ok && r.passed;
  }
  return all_ok ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FedMobile: mobility-assisted asynchronous federated learning simulator"};
  app.require_subcommand(1);

  std::string run_config, sweep_config, sweep_axis, verify_suite, verify_out;

  CLI::App* run_cmd = app.add_subcommand("run", "Run every (variant, seed) of a config");
  run_cmd->add_option("config", run_config, "experiment config (JSON)")->required();

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Sweep one parameter axis and emit a comparison CSV");
  sweep_cmd->add_option("config", sweep_config, "experiment config (JSON)")->required();
  sweep_cmd->add_option("--axis", sweep_axis,
                        "upload_window | download_window | rho | k_up | k_down")
      ->required();

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the invariant suites");
  verify_cmd->add_option("--suite", verify_suite, "run a single named suite");
  verify_cmd->add_option("--out", verify_out, "also write grid/scan artifacts here");

  try {
    app.parse(argc, argv);
    if (run_cmd->parsed()) return cmd_run(run_config);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_config, sweep_axis);
    return cmd_verify(verify_suite, verify_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const fedmobile::numerical_divergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalDivergence;
  } catch (const fedmobile::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fedmobile::protocol_violation& e) {
    std::cerr << "protocol violation: " << e.what() << "\n";
    return kExitVerificationFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerificationFailed;
  }
}
