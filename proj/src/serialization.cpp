#include "lonr/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lonr {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

nlohmann::json mdp_to_json(const MdpSpec& mdp) {
  return nlohmann::json{
      {"type", "mdp"},
      {"num_states", mdp.num_states},
      {"actions_per_state", mdp.actions_per_state},
      {"transition", mdp.transition},
      {"reward", mdp.reward},
      {"discount", mdp.discount},
      {"terminal", std::vector<int>(mdp.terminal.begin(), mdp.terminal.end())},
      {"reward_bound", mdp.reward_bound},
      {"start_state", mdp.start_state},
  };
}

MdpSpec mdp_from_json(const nlohmann::json& doc) {
  if (doc.at("type") != "mdp") {
    throw std::invalid_argument("mdp_from_json: wrong document type");
  }
  MdpSpec mdp;
  mdp.num_states = doc.at("num_states").get<int>();
  mdp.actions_per_state = doc.at("actions_per_state").get<std::vector<int>>();
  mdp.transition =
      doc.at("transition").get<std::vector<std::vector<std::vector<double>>>>();
  mdp.reward = doc.at("reward").get<std::vector<std::vector<double>>>();
  mdp.discount = doc.at("discount").get<double>();
  const auto terminal = doc.at("terminal").get<std::vector<int>>();
  mdp.terminal.assign(terminal.begin(), terminal.end());
  mdp.reward_bound = doc.at("reward_bound").get<double>();
  mdp.start_state = doc.value("start_state", 0);
  validate(mdp);
  return mdp;
}

nlohmann::json game_to_json(const MarkovGameSpec& game) {
  nlohmann::json doc{
      {"type", "markov_game"},
      {"num_states", game.num_states},
      {"num_players", game.num_players},
      {"action_counts", game.action_counts},
      {"transition", game.transition},
      {"reward", game.reward},
      {"discount", game.discount},
      {"zero_sum", game.zero_sum},
      {"terminal", std::vector<int>(game.terminal.begin(), game.terminal.end())},
      {"initial_distribution", game.initial_distribution},
  };
  doc["controller"] =
      game.controller.empty() ? nlohmann::json() : nlohmann::json(game.controller);
  doc["swap_symmetry"] = game.swap_symmetry.empty()
                             ? nlohmann::json()
                             : nlohmann::json(game.swap_symmetry);
  return doc;
}

MarkovGameSpec game_from_json(const nlohmann::json& doc) {
  if (doc.at("type") != "markov_game") {
    throw std::invalid_argument("game_from_json: wrong document type");
  }
  MarkovGameSpec game;
  game.num_states = doc.at("num_states").get<int>();
  game.num_players = doc.at("num_players").get<int>();
  if (!doc.at("controller").is_null()) {
    game.controller = doc.at("controller").get<std::vector<int>>();
  }
  game.action_counts = doc.at("action_counts").get<std::vector<std::vector<int>>>();
  game.transition =
      doc.at("transition").get<std::vector<std::vector<std::vector<double>>>>();
  game.reward =
      doc.at("reward").get<std::vector<std::vector<std::vector<double>>>>();
  game.discount = doc.at("discount").get<double>();
  game.zero_sum = doc.at("zero_sum").get<bool>();
  const auto terminal = doc.at("terminal").get<std::vector<int>>();
  game.terminal.assign(terminal.begin(), terminal.end());
  game.initial_distribution =
      doc.at("initial_distribution").get<std::vector<double>>();
  if (!doc.at("swap_symmetry").is_null()) {
    game.swap_symmetry = doc.at("swap_symmetry").get<std::vector<int>>();
  }
  validate(game);
  return game;
}

nlohmann::json minimizer_snapshot(const Minimizer& minimizer) {
  return nlohmann::json{
      {"kind", to_string(minimizer.kind())},
      {"t", minimizer.iteration()},
      {"trackers", minimizer.trackers()},
      {"policy", minimizer.current_policy()},
      {"policy_sum", minimizer.policy_sum()},
      {"weight", minimizer.total_weight()},
  };
}

nlohmann::json bound_check_to_json(const BoundCheck& check) {
  return nlohmann::json{
      {"name", check.name},
      {"lhs", check.lhs},
      {"rhs", check.rhs},
      {"tolerance", check.tolerance},
      {"passed", check.passed()},
  };
}

void write_trace_csv(std::ostream& os, const std::vector<RunResult>& players) {
  os << "iteration,player,state,action,q,q_avg,pi,pi_avg,residual,regret,selected\n";
  if (players.empty()) return;
  const std::size_t records = players[0].trace.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < records; ++i) {
    for (std::size_t player = 0; player < players.size(); ++player) {
      const TraceRecord& rec = players[player].trace[i];
      const std::size_t num_states =
          std::max({rec.q.size(), rec.policies.size(), rec.state_regret.size()});
      for (std::size_t s = 0; s < num_states; ++s) {
        const std::size_t num_actions =
            s < rec.q.size() ? rec.q[s].size()
                             : (s < rec.policies.size() ? rec.policies[s].size() : 0);
        for (std::size_t a = 0; a < num_actions; ++a) {
          const auto cell = [&](const auto& table) {
            return s < table.size() && a < table[s].size() ? table[s][a] : nan;
          };
          const int selected =
              rec.selected_state < 0 || rec.selected_state == static_cast<int>(s) ? 1
                                                                                  : 0;
          os << rec.iteration << ',' << player << ',' << s << ',' << a << ','
             << format_double(cell(rec.q)) << ',' << format_double(cell(rec.q_avg))
             << ',' << format_double(cell(rec.policies)) << ','
             << format_double(cell(rec.average_policies)) << ','
             << format_double(rec.residual) << ','
             << format_double(s < rec.state_regret.size() ? rec.state_regret[s] : nan)
             << ',' << selected << '\n';
        }
      }
    }
  }
}

}  // namespace lonr
