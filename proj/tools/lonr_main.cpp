#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lonr/experiments.hpp"

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("LONR_OUT");
  return env != nullptr ? std::string(env) : std::string("out");
}

int run_command(const std::string& preset, const std::string& config_path,
                int seed_count, const std::vector<std::uint64_t>& seed_list,
                const std::string& out, std::int64_t trace_every, int jobs,
                bool check) {
  lonr::ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot open config file: " << config_path << '\n';
        return 1;
      }
      nlohmann::json doc;
      in >> doc;
      config = lonr::config_from_json(doc);
    }
    if (!preset.empty()) {
      config.preset = preset;
      config.experiment = nlohmann::json();
    }
    if (seed_count > 0) {
      config.seeds.clear();
      for (int i = 1; i <= seed_count; ++i) config.seeds.push_back(i);
    } else if (!seed_list.empty()) {
      config.seeds = seed_list;
    }
    if (!out.empty()) config.out_dir = out;
    if (config.out_dir.empty()) config.out_dir = default_out_dir();
    if (trace_every > 0) config.trace_every = trace_every;
    if (jobs > 0) config.jobs = jobs;
    config.check = config.check || check;
  } catch (const std::exception& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 1;
  }

  const lonr::RunStatus status = lonr::run_experiment(config);
  if (!status.message.empty()) std::cerr << status.message << '\n';
  if (status.exit_code == 0) {
    std::cout << "wrote results under " << config.out_dir << '\n';
  }
  return status.exit_code;
}

int check_command(const std::string& preset, const std::string& out) {
  std::string resolved = preset;
  const std::string out_dir = out.empty() ? default_out_dir() : out;
  try {
    if (resolved.empty()) {
      std::ifstream echo(out_dir + "/config.echo.json");
      if (!echo) {
        std::cerr << "missing results: no config.echo.json under " << out_dir << '\n';
        return 2;
      }
      nlohmann::json doc;
      echo >> doc;
      resolved = doc.value("preset", std::string());
      if (resolved.empty()) {
        std::cerr << "results were not produced by a preset; pass --preset\n";
        return 1;
      }
    }
    const lonr::AcceptanceReport report = lonr::check_acceptance(resolved, out_dir);
    {
      std::ofstream report_out(out_dir + "/report.json", std::ios::binary);
      report_out << lonr::report_to_json(report).dump(2) << '\n';
    }
    for (const lonr::CriterionResult& result : report.results) {
      std::cout << (result.passed ? "[PASS] " : "[FAIL] ") << result.criterion
                << ": measured " << result.measured << ' ' << result.comparator
                << " threshold " << result.threshold << '\n';
    }
    return report.all_passed() ? 0 : 3;
  } catch (const lonr::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular no-regret Q-learning experiment runner"};
  app.require_subcommand(1);

  std::string preset;
  std::string config_path;
  int seed_count = 0;
  std::vector<std::uint64_t> seed_list;
  std::string out;
  std::int64_t trace_every = 0;
  int jobs = 0;
  bool check = false;

  CLI::App* run = app.add_subcommand("run", "execute a preset or config file");
  run->add_option("--preset", preset, "preset name (see list-presets)");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--seeds", seed_count, "run seeds 1..N");
  run->add_option("--seed-list", seed_list, "explicit seed values");
  run->add_option("--out", out, "output directory (default $LONR_OUT or ./out)");
  run->add_option("--trace-every", trace_every,
                  "record every n-th iteration (default 10)");
  run->add_option("--jobs", jobs, "parallel worker count");
  run->add_flag("--check", check, "evaluate acceptance thresholds after the run");

  std::string check_preset;
  std::string check_out;
  CLI::App* check_cmd =
      app.add_subcommand("check", "evaluate acceptance thresholds on existing results");
  check_cmd->add_option("--preset", check_preset, "preset the results belong to");
  check_cmd->add_option("--out", check_out, "results directory");

  CLI::App* list = app.add_subcommand("list-presets", "list available presets");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return run_command(preset, config_path, seed_count, seed_list, out, trace_every,
                       jobs, check);
  }
  if (check_cmd->parsed()) {
    return check_command(check_preset, check_out);
  }
  if (list->parsed()) {
    for (const lonr::PresetInfo& info : lonr::list_presets()) {
      std::cout << info.name << "  " << info.description << '\n';
    }
    return 0;
  }
  return 1;
}
