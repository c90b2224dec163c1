#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lonr/env_model.hpp"
#include "lonr/lonr.hpp"

namespace lonr {

/// Raised for malformed configs; the CLI maps it to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One named run: an environment plus a run configuration, optionally
/// followed by an evaluation pass with the learned average policies.
struct ExperimentSpec {
  std::string name;
  std::variant<MdpSpec, MarkovGameSpec> environment;
  RunConfig run;
  std::int64_t evaluation_episodes = 0;
};

struct ExperimentConfig {
  /// Exactly one of `preset` / `experiment` is set.
  std::string preset;
  nlohmann::json experiment;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir;
  std::int64_t trace_every = 10;
  int jobs = 1;
  bool check = false;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();

/// Materializes the preset's runs; seeds are applied on top by the runner.
std::vector<ExperimentSpec> build_preset(const std::string& name);

/// Parses the explicit experiment block of a config document.
ExperimentSpec experiment_from_json(const nlohmann::json& doc);

struct RunStatus {
  int exit_code = 0;  // 0 ok, 1 invalid config, 2 runtime failure, 3 check failed
  std::string message;
};

/// Executes every run in the config (preset or explicit) for every seed,
/// writing trace.csv and summary.json per run under out_dir plus
/// config.echo.json; identical configs produce byte-identical outputs.
/// With config.check set, also writes report.json and fails on unmet
/// criteria.
RunStatus run_experiment(const ExperimentConfig& config);

struct CriterionResult {
  std::string criterion;
  double measured = 0.0;
  double threshold = 0.0;
  std::string comparator;  // "<=" or ">="
  bool passed = false;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool all_passed() const;
};

/// Evaluates the acceptance thresholds relevant to the preset against the
/// summaries found under out_dir. Throws ConfigError when results are
/// missing.
AcceptanceReport check_acceptance(const std::string& preset,
                                  const std::string& out_dir);

nlohmann::json report_to_json(const AcceptanceReport& report);

}  // namespace lonr
