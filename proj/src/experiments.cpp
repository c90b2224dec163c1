#include "lonr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "lonr/analysis.hpp"
#include "lonr/serialization.hpp"

namespace lonr {

namespace fs = std::filesystem;

bool AcceptanceReport::all_passed() const {
  return std::all_of(results.begin(), results.end(),
                     [](const CriterionResult& r) { return r.passed; });
}

namespace {

// Suite constants mirroring the reported experiment thresholds.
constexpr double kNosdeSendTarget = 2.0 / 3.0;
constexpr double kNosdeOpponentTarget = 5.0 / 12.0;
constexpr double kPolicyTolerance = 0.02;
constexpr double kValueTolerance = 0.05;
constexpr double kAvgAmplitudeTolerance = 0.01;
constexpr double kCyclingAmplitude = 0.2;
constexpr double kGridTarget = -13.0;
constexpr std::int64_t kAvgWindowIterations = 10000;
constexpr std::int64_t kLastWindowIterations = 1000;

enum class MetricFamily { kNone, kNosde, kGrid, kSoccer, kMatrix };

struct NamedRun {
  ExperimentSpec spec;
  MetricFamily family = MetricFamily::kNone;
};

std::vector<std::vector<double>> rps_payoffs() {
  return {{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}};
}

std::vector<std::vector<double>> negate(std::vector<std::vector<double>> m) {
  for (auto& row : m) {
    for (double& v : row) v = -v;
  }
  return m;
}

TraceOptions default_trace(std::int64_t every) {
  TraceOptions trace;
  trace.enabled = true;
  trace.every = every;
  trace.policies = true;
  trace.tables = true;
  trace.residual = true;
  trace.regrets = true;
  return trace;
}

const std::vector<std::pair<std::string, MinimizerKind>>& full_information_kinds() {
  static const std::vector<std::pair<std::string, MinimizerKind>> kinds = {
      {"rm", MinimizerKind::kRegretMatching},
      {"rm_plus", MinimizerKind::kRegretMatchingPlus},
      {"rm_plus_plus", MinimizerKind::kRegretMatchingPlusPlus},
      {"dcfr", MinimizerKind::kDiscountedCfr},
      {"mwu", MinimizerKind::kMultiplicativeWeights},
      {"omwu", MinimizerKind::kOptimisticMultiplicativeWeights},
  };
  return kinds;
}

std::vector<NamedRun> build_preset_runs(const std::string& name) {
  std::vector<NamedRun> runs;
  const auto nosde_base = [] {
    ExperimentSpec spec;
    spec.environment = make_nosde(0.75);
    spec.run.algorithm = Algorithm::kLonrV;
    spec.run.iterations = 100000;
    spec.run.trace = default_trace(10);
    return spec;
  };
  if (name == "nosde-avg" || name == "nosde-last") {
    for (const auto& [kind_name, kind] : full_information_kinds()) {
      NamedRun run;
      run.family = MetricFamily::kNosde;
      run.spec = nosde_base();
      run.spec.name = kind_name;
      run.spec.run.minimizer = kind;
      run.spec.run.params.optimism_count = 4;
      runs.push_back(std::move(run));
    }
  } else if (name == "omwu-counts") {
    for (int count : {2, 3, 4, 6, 8}) {
      NamedRun run;
      run.family = MetricFamily::kNosde;
      run.spec = nosde_base();
      run.spec.name = "omwu_c" + std::to_string(count);
      run.spec.run.minimizer = MinimizerKind::kOptimisticMultiplicativeWeights;
      run.spec.run.params.optimism_count = count;
      runs.push_back(std::move(run));
    }
  } else if (name == "nosde-a-rmpp" || name == "nosde-a-omwu") {
    NamedRun run;
    run.family = MetricFamily::kNosde;
    run.spec = nosde_base();
    run.spec.name = name == "nosde-a-rmpp" ? "rm_plus_plus" : "omwu_c4";
    run.spec.run.algorithm = Algorithm::kLonrA;
    run.spec.run.selection = StateSelection::kOnPolicy;
    run.spec.run.explore_epsilon = 0.1;
    run.spec.run.iterations = 200000;
    run.spec.run.minimizer = name == "nosde-a-rmpp"
                                 ? MinimizerKind::kRegretMatchingPlusPlus
                                 : MinimizerKind::kOptimisticMultiplicativeWeights;
    run.spec.run.params.optimism_count = 4;
    runs.push_back(std::move(run));
  } else if (name == "grid") {
    NamedRun run;
    run.family = MetricFamily::kGrid;
    run.spec.name = "rm_plus_plus";
    run.spec.environment = make_cliff_grid(4, 12);
    run.spec.run.algorithm = Algorithm::kLonrV;
    run.spec.run.minimizer = MinimizerKind::kRegretMatchingPlusPlus;
    run.spec.run.iterations = 10000;
    run.spec.run.trace = default_trace(10);
    runs.push_back(std::move(run));
  } else if (name == "grid-a") {
    NamedRun run;
    run.family = MetricFamily::kGrid;
    run.spec.name = "rm_plus_plus";
    run.spec.environment = make_cliff_grid(4, 12);
    run.spec.run.algorithm = Algorithm::kLonrA;
    run.spec.run.selection = StateSelection::kOnPolicy;
    run.spec.run.explore_epsilon = 0.1;
    run.spec.run.minimizer = MinimizerKind::kRegretMatchingPlusPlus;
    run.spec.run.iterations = 100000;
    run.spec.run.trace = default_trace(1000);
    run.spec.run.trace.residual = false;
    runs.push_back(std::move(run));
  } else if (name == "soccer") {
    for (const auto& [kind_name, kind] : full_information_kinds()) {
      NamedRun run;
      run.family = MetricFamily::kSoccer;
      run.spec.name = kind_name;
      run.spec.environment = make_soccer();
      run.spec.run.algorithm = Algorithm::kLonrV;
      run.spec.run.minimizer = kind;
      run.spec.run.params.optimism_count = 4;
      run.spec.run.iterations = 1000;
      run.spec.run.trace = default_trace(10);
      run.spec.run.trace.tables = false;
      run.spec.evaluation_episodes = 1000;
      runs.push_back(std::move(run));
    }
  } else if (name == "rps-rmpp") {
    NamedRun run;
    run.family = MetricFamily::kMatrix;
    run.spec.name = "rm_plus_plus";
    run.spec.environment = make_matrix_game(rps_payoffs(), negate(rps_payoffs()));
    run.spec.run.algorithm = Algorithm::kLonrV;
    run.spec.run.minimizer = MinimizerKind::kRegretMatchingPlusPlus;
    run.spec.run.iterations = 100000;
    run.spec.run.trace = default_trace(10);
    runs.push_back(std::move(run));
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return runs;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  return {
      {"nosde-avg", "average policies of all six minimizers on the two-state game"},
      {"nosde-last", "current-iterate trajectories of all six minimizers on the two-state game"},
      {"omwu-counts", "last-iterate convergence for optimism counts 2, 3, 4, 6, 8"},
      {"nosde-a-rmpp", "asynchronous on-policy runs with regret matching++"},
      {"nosde-a-omwu", "asynchronous on-policy runs with optimistic weights (count 4)"},
      {"grid", "synchronous runs on the 4x12 cliff grid"},
      {"grid-a", "asynchronous on-policy runs on the 4x12 cliff grid"},
      {"soccer", "self-play plus evaluation games on grid soccer for all six minimizers"},
      {"rps-rmpp", "regret matching++ self-play on rock-paper-scissors"},
  };
}

std::vector<ExperimentSpec> build_preset(const std::string& name) {
  std::vector<ExperimentSpec> specs;
  for (auto& run : build_preset_runs(name)) specs.push_back(std::move(run.spec));
  return specs;
}

namespace {

std::variant<MdpSpec, MarkovGameSpec> environment_from_json(
    const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "nosde") return make_nosde(doc.value("discount", 0.75));
  if (kind == "cliff_grid") {
    return make_cliff_grid(doc.value("rows", 4), doc.value("cols", 12));
  }
  if (kind == "soccer") return make_soccer();
  if (kind == "random_mdp") {
    return make_random_mdp(doc.at("seed").get<std::uint64_t>(),
                           doc.at("num_states").get<int>(),
                           doc.at("num_actions").get<int>(),
                           doc.at("discount").get<double>());
  }
  if (kind == "matrix_rps") {
    return make_matrix_game(rps_payoffs(), negate(rps_payoffs()),
                            doc.value("discount", 0.0));
  }
  if (kind == "matrix_matching_pennies") {
    const std::vector<std::vector<double>> pennies = {{1, -1}, {-1, 1}};
    return make_matrix_game(pennies, negate(pennies), doc.value("discount", 0.0));
  }
  if (kind == "matrix") {
    return make_matrix_game(
        doc.at("payoff_p0").get<std::vector<std::vector<double>>>(),
        doc.at("payoff_p1").get<std::vector<std::vector<double>>>(),
        doc.value("discount", 0.0));
  }
  if (kind == "inline_mdp") return mdp_from_json(doc.at("spec"));
  if (kind == "inline_game") return game_from_json(doc.at("spec"));
  throw ConfigError("unknown environment kind: " + kind);
}

}  // namespace

ExperimentSpec experiment_from_json(const nlohmann::json& doc) {
  try {
    ExperimentSpec spec;
    spec.name = doc.value("name", "experiment");
    spec.environment = environment_from_json(doc.at("environment"));
    spec.run.algorithm =
        algorithm_from_string(doc.value("algorithm", std::string("lonr_v")));
    spec.run.minimizer = minimizer_kind_from_string(
        doc.value("minimizer", std::string("rm_plus_plus")));
    spec.run.params.learning_rate = doc.value("learning_rate", 0.1);
    spec.run.params.optimism_count = doc.value("optimism_count", 2);
    spec.run.params.dcfr_alpha = doc.value("dcfr_alpha", 1.5);
    spec.run.params.dcfr_beta = doc.value("dcfr_beta", 0.0);
    spec.run.params.dcfr_average_gamma = doc.value("dcfr_average_gamma", 2.0);
    spec.run.iterations = doc.at("iterations").get<std::int64_t>();
    spec.run.selection = state_selection_from_string(
        doc.value("selection", std::string("uniform")));
    spec.run.explore_epsilon = doc.value("explore_epsilon", 0.1);
    spec.run.initial_q = doc.value("initial_q", 0.0);
    spec.run.sarsa_bandit = doc.value("sarsa_bandit", false);
    spec.run.trace = default_trace(10);
    if (doc.contains("trace")) {
      const auto& trace = doc.at("trace");
      spec.run.trace.enabled = trace.value("enabled", true);
      spec.run.trace.every = trace.value("every", std::int64_t{10});
      spec.run.trace.policies = trace.value("policies", true);
      spec.run.trace.tables = trace.value("tables", true);
      spec.run.trace.residual = trace.value("residual", true);
      spec.run.trace.regrets = trace.value("regrets", true);
      spec.run.trace.expected_values = trace.value("expected_values", false);
    }
    spec.evaluation_episodes = doc.value("evaluation_episodes", std::int64_t{0});
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid experiment block: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid experiment block: ") + e.what());
  }
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  ExperimentConfig config;
  try {
    if (doc.contains("preset")) config.preset = doc.at("preset").get<std::string>();
    if (doc.contains("experiment")) config.experiment = doc.at("experiment");
    if (doc.contains("seeds")) {
      config.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    }
    config.out_dir = doc.value("out_dir", std::string());
    config.trace_every = doc.value("trace_every", std::int64_t{0});
    config.jobs = doc.value("jobs", 1);
    config.check = doc.value("check", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (config.preset.empty() == config.experiment.is_null()) {
    throw ConfigError("config must set exactly one of preset / experiment");
  }
  if (config.seeds.empty()) throw ConfigError("config needs at least one seed");
  return config;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json doc;
  if (!config.preset.empty()) doc["preset"] = config.preset;
  if (!config.experiment.is_null()) doc["experiment"] = config.experiment;
  doc["seeds"] = config.seeds;
  doc["out_dir"] = config.out_dir;
  doc["trace_every"] = config.trace_every;
  doc["jobs"] = config.jobs;
  doc["check"] = config.check;
  return doc;
}

namespace {

std::vector<double> trace_series(const RunResult& result, int state, int action,
                                 bool average) {
  std::vector<double> series;
  series.reserve(result.trace.size());
  for (const TraceRecord& rec : result.trace) {
    const auto& policies = average ? rec.average_policies : rec.policies;
    series.push_back(policies[state][action]);
  }
  return series;
}

std::int64_t window_records(const RunResult& result, std::int64_t iterations) {
  if (result.trace.empty()) return 0;
  const std::int64_t every = std::max<std::int64_t>(
      1, result.trace.size() > 1
             ? result.trace[1].iteration - result.trace[0].iteration
             : result.trace[0].iteration);
  return std::max<std::int64_t>(
      1, std::min<std::int64_t>(iterations / every,
                                static_cast<std::int64_t>(result.trace.size())));
}

// Earliest recorded iteration after which the series stays inside a band of
// the given width; infinity when it never settles.
double settle_iteration(const RunResult& result, const std::vector<double>& series,
                        double width) {
  if (series.empty()) return std::numeric_limits<double>::infinity();
  double suffix_min = series.back();
  double suffix_max = series.back();
  std::int64_t first = -1;
  for (std::int64_t i = static_cast<std::int64_t>(series.size()) - 1; i >= 0; --i) {
    suffix_min = std::min(suffix_min, series[i]);
    suffix_max = std::max(suffix_max, series[i]);
    if (suffix_max - suffix_min > width) break;
    first = i;
  }
  if (first < 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(result.trace[first].iteration);
}

nlohmann::json metrics_for(MetricFamily family,
                           const std::variant<MdpSpec, MarkovGameSpec>& env,
                           const std::vector<RunResult>& results,
                           const EvaluationResult* evaluation) {
  nlohmann::json metrics = nlohmann::json::object();
  for (std::size_t n = 0; n < results.size(); ++n) {
    const std::string prefix = "player" + std::to_string(n) + "_";
    metrics[prefix + "range_bound_excess"] = results[n].range_bound_excess;
    metrics[prefix + "fixed_point_bound_excess"] =
        results[n].fixed_point_bound_excess;
    if (!results[n].trace.empty()) {
      metrics[prefix + "final_residual"] = results[n].trace.back().residual;
    }
  }
  switch (family) {
    case MetricFamily::kNone:
      break;
    case MetricFamily::kNosde: {
      const RunResult& p0 = results.at(0);
      const RunResult& p1 = results.at(1);
      metrics["p0_send_average_final"] = p0.average_policies[0][kSend];
      metrics["p1_send_average_final"] = p1.average_policies[1][kSend];
      metrics["q_avg_state0_keep"] = p0.q.avg_inclusive(0, kKeep);
      metrics["q_avg_state0_send"] = p0.q.avg_inclusive(0, kSend);
      if (!p0.trace.empty() && !p0.trace[0].average_policies.empty()) {
        const auto avg_series = trace_series(p0, 0, kSend, /*average=*/true);
        const auto cur_series = trace_series(p0, 0, kSend, /*average=*/false);
        const auto avg_stats =
            window_stats(avg_series, window_records(p0, kAvgWindowIterations));
        const auto cur_stats =
            window_stats(cur_series, window_records(p0, kLastWindowIterations));
        metrics["p0_send_average_window_amplitude"] = avg_stats.amplitude;
        metrics["p0_send_last_window_mean"] = cur_stats.mean;
        metrics["p0_send_last_window_amplitude"] = cur_stats.amplitude;
        metrics["time_to_last_iterate_tolerance"] =
            settle_iteration(p0, cur_series, kPolicyTolerance);
      }
      break;
    }
    case MetricFamily::kGrid: {
      const MdpSpec& mdp = std::get<MdpSpec>(env);
      const RunResult& result = results.at(0);
      metrics["q_avg_start_north"] =
          result.q.avg_inclusive(mdp.start_state, kNorth);
      break;
    }
    case MetricFamily::kSoccer: {
      if (evaluation != nullptr) {
        metrics["mean_score_p0"] = evaluation->mean_scores.at(0);
        metrics["mean_score_p1"] = evaluation->mean_scores.at(1);
        metrics["capped_episodes"] = evaluation->capped_episodes;
      }
      break;
    }
    case MetricFamily::kMatrix: {
      const RunResult& p0 = results.at(0);
      const int actions = static_cast<int>(p0.current_policies[0].size());
      double deviation = 0.0;
      for (double p : p0.current_policies[0]) {
        deviation = std::max(deviation, std::abs(p - 1.0 / actions));
      }
      metrics["last_policy_max_dev_uniform"] = deviation;
      if (!p0.trace.empty() && !p0.trace[0].policies.empty()) {
        double amplitude = 0.0;
        for (int a = 0; a < actions; ++a) {
          const auto series = trace_series(p0, 0, a, /*average=*/false);
          amplitude = std::max(
              amplitude,
              window_stats(series, window_records(p0, kLastWindowIterations))
                  .amplitude);
        }
        metrics["current_window_amplitude"] = amplitude;
      }
      break;
    }
  }
  return metrics;
}

nlohmann::json final_tables_json(const RunResult& result) {
  nlohmann::json doc;
  doc["q"] = result.q.values();
  doc["q_avg_inclusive"] = result.q.avg_inclusive_table();
  doc["q_avg_exclusive"] = result.q.avg_exclusive_table();
  doc["current_policy"] = result.current_policies;
  doc["average_policy"] = result.average_policies;
  doc["final_state_regret"] = result.final_state_regret;
  doc["range_bound_excess"] = result.range_bound_excess;
  doc["fixed_point_bound_excess"] = result.fixed_point_bound_excess;
  return doc;
}

void run_one(const NamedRun& named, std::uint64_t seed, const fs::path& out_dir) {
  const ExperimentSpec& spec = named.spec;
  RunConfig run = spec.run;
  run.seed = seed;
  std::vector<RunResult> results;
  EvaluationResult evaluation;
  bool evaluated = false;
  if (std::holds_alternative<MarkovGameSpec>(spec.environment)) {
    const MarkovGameSpec& game = std::get<MarkovGameSpec>(spec.environment);
    results = run_selfplay(game, run);
    if (spec.evaluation_episodes > 0) {
      std::vector<std::vector<ActionDistribution>> policies;
      for (const RunResult& result : results) {
        policies.push_back(result.average_policies);
      }
      Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
      evaluation =
          evaluate_policies(game, policies, spec.evaluation_episodes, rng);
      evaluated = true;
    }
  } else {
    results.push_back(run_lonr(std::get<MdpSpec>(spec.environment), run));
  }

  const fs::path dir = out_dir / spec.name / ("seed-" + std::to_string(seed));
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "trace.csv", std::ios::binary);
    write_trace_csv(csv, results);
  }
  nlohmann::json summary;
  summary["run"] = spec.name;
  summary["seed"] = seed;
  summary["algorithm"] = to_string(run.algorithm);
  summary["minimizer"] = to_string(run.minimizer);
  summary["iterations"] = run.iterations;
  summary["players"] = nlohmann::json::array();
  for (const RunResult& result : results) {
    summary["players"].push_back(final_tables_json(result));
  }
  summary["metrics"] = metrics_for(named.family, spec.environment, results,
                                   evaluated ? &evaluation : nullptr);
  if (evaluated) {
    summary["evaluation"] = {{"mean_scores", evaluation.mean_scores},
                             {"capped_episodes", evaluation.capped_episodes}};
  }
  std::ofstream json_out(dir / "summary.json", std::ios::binary);
  json_out << summary.dump(2) << '\n';
}

std::vector<NamedRun> resolve_runs(const ExperimentConfig& config) {
  std::vector<NamedRun> runs;
  if (!config.preset.empty()) {
    runs = build_preset_runs(config.preset);
  } else {
    NamedRun run;
    run.spec = experiment_from_json(config.experiment);
    runs.push_back(std::move(run));
  }
  if (config.trace_every > 0) {
    for (NamedRun& run : runs) run.spec.run.trace.every = config.trace_every;
  }
  return runs;
}

}  // namespace

RunStatus run_experiment(const ExperimentConfig& config) {
  std::vector<NamedRun> runs;
  try {
    if (config.seeds.empty()) throw ConfigError("config needs at least one seed");
    if (config.preset.empty() == config.experiment.is_null()) {
      throw ConfigError("config must set exactly one of preset / experiment");
    }
    runs = resolve_runs(config);
  } catch (const ConfigError& e) {
    return {1, e.what()};
  } catch (const std::invalid_argument& e) {
    return {1, e.what()};
  }

  try {
    const fs::path out_dir = config.out_dir.empty() ? fs::path(".")
                                                    : fs::path(config.out_dir);
    fs::create_directories(out_dir);
    {
      std::ofstream echo(out_dir / "config.echo.json", std::ios::binary);
      echo << config_to_json(config).dump(2) << '\n';
    }

    struct Task {
      const NamedRun* run;
      std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const NamedRun& run : runs) {
      for (std::uint64_t seed : config.seeds) tasks.push_back({&run, seed});
    }
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::string failure;
    const int jobs = std::max(1, config.jobs);
    auto worker = [&] {
      while (true) {
        const std::size_t index = next.fetch_add(1);
        if (index >= tasks.size()) return;
        try {
          run_one(*tasks[index].run, tasks[index].seed, out_dir);
        } catch (const std::exception& e) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (failure.empty()) failure = e.what();
        }
      }
    };
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
      for (std::thread& thread : pool) thread.join();
    }
    if (!failure.empty()) return {2, failure};

    if (config.check) {
      if (config.preset.empty()) {
        return {1, "--check requires a preset"};
      }
      const AcceptanceReport report =
          check_acceptance(config.preset, out_dir.string());
      std::ofstream report_out(out_dir / "report.json", std::ios::binary);
      report_out << report_to_json(report).dump(2) << '\n';
      if (!report.all_passed()) return {3, "acceptance criteria not met"};
    }
  } catch (const ConfigError& e) {
    return {1, e.what()};
  } catch (const std::exception& e) {
    return {2, e.what()};
  }
  return {0, ""};
}

namespace {

nlohmann::json load_summary(const fs::path& out_dir, const std::string& run,
                            std::uint64_t seed) {
  const fs::path path =
      out_dir / run / ("seed-" + std::to_string(seed)) / "summary.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("missing results: " + path.string());
  nlohmann::json doc;
  in >> doc;
  return doc;
}

CriterionResult make_result(std::string name, double measured, double threshold,
                            std::string comparator) {
  CriterionResult result;
  result.criterion = std::move(name);
  result.measured = measured;
  result.threshold = threshold;
  result.comparator = comparator;
  result.passed = comparator == "<=" ? measured <= threshold : measured >= threshold;
  return result;
}

}  // namespace

AcceptanceReport check_acceptance(const std::string& preset,
                                  const std::string& out_dir_string) {
  const fs::path out_dir(out_dir_string);
  std::vector<std::uint64_t> seeds = {1};
  {
    std::ifstream echo(out_dir / "config.echo.json");
    if (!echo) throw ConfigError("missing results: no config.echo.json under " +
                                 out_dir_string);
    nlohmann::json doc;
    echo >> doc;
    seeds = doc.value("seeds", seeds);
  }

  AcceptanceReport report;
  const auto metric = [&](const nlohmann::json& summary, const std::string& key) {
    return summary.at("metrics").at(key).get<double>();
  };

  if (preset == "nosde-avg") {
    for (const auto& [kind_name, kind] : full_information_kinds()) {
      (void)kind;
      const nlohmann::json summary = load_summary(out_dir, kind_name, seeds[0]);
      const double send = metric(summary, "p0_send_average_final");
      if (kind_name == "rm_plus_plus" || kind_name == "omwu") {
        report.results.push_back(make_result(
            kind_name + ": |avg p0 send - 2/3|",
            std::abs(send - kNosdeSendTarget), kPolicyTolerance, "<="));
        report.results.push_back(make_result(
            kind_name + ": |avg p1 send - 5/12|",
            std::abs(metric(summary, "p1_send_average_final") - kNosdeOpponentTarget),
            kPolicyTolerance, "<="));
        for (const char* key : {"q_avg_state0_keep", "q_avg_state0_send"}) {
          report.results.push_back(
              make_result(kind_name + ": |" + key + " - 4|",
                          std::abs(metric(summary, key) - 4.0), kValueTolerance,
                          "<="));
        }
      } else if (kind_name == "rm" || kind_name == "mwu") {
        report.results.push_back(make_result(
            kind_name + ": average settles",
            metric(summary, "p0_send_average_window_amplitude"),
            kAvgAmplitudeTolerance, "<="));
        report.results.push_back(
            make_result(kind_name + ": settles away from 2/3",
                        std::abs(send - kNosdeSendTarget), 0.05, ">="));
      }
    }
  } else if (preset == "nosde-last") {
    for (const auto& [kind_name, kind] : full_information_kinds()) {
      (void)kind;
      const nlohmann::json summary = load_summary(out_dir, kind_name, seeds[0]);
      const double amplitude = metric(summary, "p0_send_last_window_amplitude");
      if (kind_name == "rm_plus_plus" || kind_name == "omwu") {
        report.results.push_back(make_result(kind_name + ": last-iterate amplitude",
                                             amplitude, kPolicyTolerance, "<="));
        report.results.push_back(make_result(
            kind_name + ": |last-iterate mean - 2/3|",
            std::abs(metric(summary, "p0_send_last_window_mean") - kNosdeSendTarget),
            kPolicyTolerance, "<="));
      } else {
        report.results.push_back(make_result(kind_name + ": cycles", amplitude,
                                             kCyclingAmplitude, ">="));
      }
    }
  } else if (preset == "omwu-counts") {
    double previous_time = std::numeric_limits<double>::infinity();
    for (int count : {2, 3, 4, 6, 8}) {
      const std::string run = "omwu_c" + std::to_string(count);
      const nlohmann::json summary = load_summary(out_dir, run, seeds[0]);
      const double amplitude = metric(summary, "p0_send_last_window_amplitude");
      if (count == 2) {
        report.results.push_back(
            make_result(run + ": fails last-iterate tolerance", amplitude,
                        kPolicyTolerance, ">="));
      } else if (count >= 4) {
        report.results.push_back(make_result(run + ": last-iterate amplitude",
                                             amplitude, kPolicyTolerance, "<="));
        const double time = metric(summary, "time_to_last_iterate_tolerance");
        report.results.push_back(make_result(
            run + ": time to tolerance non-increasing", time, previous_time, "<="));
        previous_time = time;
      }
    }
  } else if (preset == "nosde-a-rmpp" || preset == "nosde-a-omwu") {
    const std::string run =
        preset == "nosde-a-rmpp" ? "rm_plus_plus" : "omwu_c4";
    int good = 0;
    for (std::uint64_t seed : seeds) {
      const nlohmann::json summary = load_summary(out_dir, run, seed);
      const bool ok =
          metric(summary, "p0_send_last_window_amplitude") <= kPolicyTolerance &&
          std::abs(metric(summary, "p0_send_last_window_mean") - kNosdeSendTarget) <=
              kPolicyTolerance;
      good += ok ? 1 : 0;
    }
    report.results.push_back(make_result(
        run + ": fraction of seeds at last-iterate tolerance",
        static_cast<double>(good) / static_cast<double>(seeds.size()), 0.95, ">="));
  } else if (preset == "grid") {
    const nlohmann::json summary = load_summary(out_dir, "rm_plus_plus", seeds[0]);
    report.results.push_back(
        make_result("grid: |avg Q(start, north) + 13|",
                    std::abs(metric(summary, "q_avg_start_north") - kGridTarget),
                    0.1, "<="));
  } else if (preset == "grid-a") {
    double worst = 0.0;
    for (std::uint64_t seed : seeds) {
      const nlohmann::json summary = load_summary(out_dir, "rm_plus_plus", seed);
      worst = std::max(
          worst, std::abs(metric(summary, "q_avg_start_north") - kGridTarget));
    }
    report.results.push_back(make_result(
        "grid-a: max over seeds |avg Q(start, north) + 13|", worst, 0.5, "<="));
  } else if (preset == "soccer") {
    for (const auto& [kind_name, kind] : full_information_kinds()) {
      (void)kind;
      const nlohmann::json summary = load_summary(out_dir, kind_name, seeds[0]);
      const double worst =
          std::max(std::abs(metric(summary, "mean_score_p0")),
                   std::abs(metric(summary, "mean_score_p1")));
      report.results.push_back(
          make_result(kind_name + ": |mean evaluation score|", worst, 5.0, "<="));
    }
  } else if (preset == "rps-rmpp") {
    const nlohmann::json summary = load_summary(out_dir, "rm_plus_plus", seeds[0]);
    report.results.push_back(make_result(
        "rps: last-iterate distance to uniform",
        metric(summary, "last_policy_max_dev_uniform"), 0.01, "<="));
  } else {
    throw ConfigError("unknown preset: " + preset);
  }
  return report;
}

nlohmann::json report_to_json(const AcceptanceReport& report) {
  nlohmann::json doc;
  doc["all_passed"] = report.all_passed();
  doc["criteria"] = nlohmann::json::array();
  for (const CriterionResult& result : report.results) {
    doc["criteria"].push_back({{"criterion", result.criterion},
                               {"measured", result.measured},
                               {"threshold", result.threshold},
                               {"comparator", result.comparator},
                               {"passed", result.passed}});
  }
  return doc;
}

}  // namespace lonr
