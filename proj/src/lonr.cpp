#include "lonr/lonr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lonr/analysis.hpp"

namespace lonr {

QTable::QTable(const std::vector<int>& actions_per_state, double initial_value) {
  const int num_states = static_cast<int>(actions_per_state.size());
  values_.resize(num_states);
  for (int s = 0; s < num_states; ++s) {
    values_[s].assign(actions_per_state[s], initial_value);
  }
  initial_ = values_;
  sums_.resize(num_states);
  for (int s = 0; s < num_states; ++s) sums_[s].assign(actions_per_state[s], 0.0);
  counts_.assign(num_states, 0);
}

void QTable::record_update(int s) {
  for (std::size_t a = 0; a < values_[s].size(); ++a) sums_[s][a] += values_[s][a];
  ++counts_[s];
}

double QTable::avg_inclusive(int s, int a) const {
  if (counts_[s] == 0) return initial_[s][a];
  return sums_[s][a] / static_cast<double>(counts_[s]);
}

double QTable::avg_exclusive(int s, int a) const {
  if (counts_[s] == 0) return initial_[s][a];
  return (sums_[s][a] - values_[s][a] + initial_[s][a]) /
         static_cast<double>(counts_[s]);
}

QValues QTable::avg_inclusive_table() const {
  QValues out(values_.size());
  for (int s = 0; s < num_states(); ++s) {
    out[s].resize(values_[s].size());
    for (std::size_t a = 0; a < values_[s].size(); ++a) {
      out[s][a] = avg_inclusive(s, static_cast<int>(a));
    }
  }
  return out;
}

QValues QTable::avg_exclusive_table() const {
  QValues out(values_.size());
  for (int s = 0; s < num_states(); ++s) {
    out[s].resize(values_[s].size());
    for (std::size_t a = 0; a < values_[s].size(); ++a) {
      out[s][a] = avg_exclusive(s, static_cast<int>(a));
    }
  }
  return out;
}

double QTable::max_deviation_from_initial() const {
  double out = 0.0;
  for (int s = 0; s < num_states(); ++s) {
    for (std::size_t a = 0; a < values_[s].size(); ++a) {
      out = std::max(out, std::abs(values_[s][a] - initial_[s][a]));
    }
  }
  return out;
}

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kLonrV: return "lonr_v";
    case Algorithm::kLonrA: return "lonr_a";
    case Algorithm::kLonrB: return "lonr_b";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "lonr_v") return Algorithm::kLonrV;
  if (name == "lonr_a") return Algorithm::kLonrA;
  if (name == "lonr_b") return Algorithm::kLonrB;
  throw std::invalid_argument("unknown algorithm: " + name);
}

const char* to_string(StateSelection selection) {
  return selection == StateSelection::kUniform ? "uniform" : "on_policy";
}

StateSelection state_selection_from_string(const std::string& name) {
  if (name == "uniform") return StateSelection::kUniform;
  if (name == "on_policy") return StateSelection::kOnPolicy;
  throw std::invalid_argument("unknown state selection: " + name);
}

namespace {

void check_config(const RunConfig& config) {
  if (config.iterations < 1) {
    throw std::invalid_argument("run config: iterations must be >= 1");
  }
  if (!(config.explore_epsilon >= 0.0 && config.explore_epsilon <= 1.0)) {
    throw std::invalid_argument("run config: explore epsilon must lie in [0, 1]");
  }
  if (!std::isfinite(config.initial_q)) {
    throw std::invalid_argument("run config: initial Q must be finite");
  }
  const bool bandit = config.minimizer == MinimizerKind::kExp3;
  if (config.algorithm == Algorithm::kLonrB && !bandit) {
    throw std::invalid_argument("run config: the bandit variant needs a bandit-capable minimizer");
  }
  if (config.algorithm != Algorithm::kLonrB && bandit) {
    throw std::invalid_argument("run config: exp3 only runs under the bandit variant");
  }
}

void check_learners(const std::vector<Minimizer>& learners, const MdpSpec& mdp) {
  if (static_cast<int>(learners.size()) != mdp.num_states) {
    throw std::invalid_argument("lonr: one learner per state required");
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    if (learners[s].num_actions() != mdp.num_actions(s)) {
      throw std::invalid_argument("lonr: learner action count disagrees with the mdp");
    }
  }
}

std::vector<Minimizer> make_learners(const MdpSpec& mdp, const RunConfig& config) {
  std::vector<Minimizer> learners;
  learners.reserve(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    learners.emplace_back(config.minimizer, mdp.num_actions(s), config.params);
  }
  return learners;
}

std::vector<double> policy_expected_values(const QTable& q,
                                           const std::vector<Minimizer>& learners) {
  std::vector<double> values(q.num_states());
  for (int s = 0; s < q.num_states(); ++s) {
    const auto& policy = learners[s].current_policy();
    const auto& row = q.row(s);
    double v = 0.0;
    for (std::size_t a = 0; a < row.size(); ++a) v += policy[a] * row[a];
    values[s] = v;
  }
  return values;
}

std::vector<double> backup_row(const MdpSpec& mdp,
                               const std::vector<double>& expected_values, int s,
                               std::int64_t t) {
  std::vector<double> row(mdp.num_actions(s));
  for (int a = 0; a < mdp.num_actions(s); ++a) {
    double bootstrap = 0.0;
    const auto& kernel = mdp.transition[s][a];
    for (int s2 = 0; s2 < mdp.num_states; ++s2) {
      if (kernel[s2] > 0.0) bootstrap += kernel[s2] * expected_values[s2];
    }
    row[a] = mdp.reward_at(t, s, a) + mdp.discount * bootstrap;
    if (!std::isfinite(row[a])) throw std::runtime_error("lonr: non-finite backup");
  }
  return row;
}

// Signed average regret of the value stream a state fed to its successors:
// hindsight-best cumulative reward minus realized, divided by the horizon.
struct RegretAccumulators {
  std::vector<std::vector<double>> cumulative;
  std::vector<double> realized;
  std::vector<std::int64_t> horizons;

  explicit RegretAccumulators(const std::vector<int>& actions_per_state)
      : realized(actions_per_state.size(), 0.0),
        horizons(actions_per_state.size(), 0) {
    cumulative.resize(actions_per_state.size());
    for (std::size_t s = 0; s < actions_per_state.size(); ++s) {
      cumulative[s].assign(actions_per_state[s], 0.0);
    }
  }

  void add(int s, const std::vector<double>& rewards,
           const ActionDistribution& policy) {
    double expected = 0.0;
    for (std::size_t a = 0; a < rewards.size(); ++a) {
      cumulative[s][a] += rewards[a];
      expected += policy[a] * rewards[a];
    }
    realized[s] += expected;
    ++horizons[s];
  }

  double signed_regret(int s) const {
    if (horizons[s] == 0) return 0.0;
    const double best =
        *std::max_element(cumulative[s].begin(), cumulative[s].end());
    return (best - realized[s]) / static_cast<double>(horizons[s]);
  }

  double max_abs_regret() const {
    double out = 0.0;
    for (std::size_t s = 0; s < realized.size(); ++s) {
      out = std::max(out, std::abs(signed_regret(static_cast<int>(s))));
    }
    return out;
  }
};

// Book-keeping shared by the drivers: bound tracking, reward averaging for
// scheduled rewards, and trace assembly.
struct RunRecorder {
  const MdpSpec& mdp;
  const RunConfig& config;
  RunResult result;
  RegretAccumulators regrets;
  QValues reward_sums;  // only maintained when a schedule is present
  double range_bound;

  RunRecorder(const MdpSpec& m, const RunConfig& c)
      : mdp(m), config(c), regrets(m.actions_per_state) {
    range_bound = mdp.discount < 1.0
                      ? mdp.reward_bound / (1.0 - mdp.discount) +
                            2.0 * std::abs(config.initial_q)
                      : std::numeric_limits<double>::infinity();
    result.range_bound_excess = -std::numeric_limits<double>::infinity();
    result.fixed_point_bound_excess = std::numeric_limits<double>::quiet_NaN();
    if (mdp.has_schedule()) {
      reward_sums.resize(mdp.num_states);
      for (int s = 0; s < mdp.num_states; ++s) {
        reward_sums[s].assign(mdp.num_actions(s), 0.0);
      }
    }
  }

  void accumulate_rewards(std::int64_t t) {
    if (!mdp.has_schedule()) return;
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < mdp.num_actions(s); ++a) {
        reward_sums[s][a] += mdp.reward_at(t, s, a);
      }
    }
  }

  // Reward table of the averaged operator at horizon k (sweeps so far).
  QValues averaged_rewards(std::int64_t k) const {
    if (!mdp.has_schedule()) return mdp.reward;
    QValues avg = reward_sums;
    for (auto& row : avg) {
      for (double& r : row) r /= static_cast<double>(k);
    }
    return avg;
  }

  void track_range(const QTable& q) {
    if (mdp.discount >= 1.0) return;
    result.range_bound_excess = std::max(
        result.range_bound_excess, q.max_deviation_from_initial() - range_bound);
  }

  bool should_record(std::int64_t t) const {
    if (!config.trace.enabled) return false;
    return (t + 1) % config.trace.every == 0 || t + 1 == config.iterations;
  }

  void record(const QTable& q, const std::vector<Minimizer>& learners,
              std::int64_t t, int selected, bool synchronous) {
    TraceRecord rec;
    rec.iteration = t + 1;
    rec.selected_state = selected;
    rec.residual = std::numeric_limits<double>::quiet_NaN();
    if (config.trace.residual) {
      const QValues table =
          synchronous ? q.avg_exclusive_table() : q.avg_inclusive_table();
      rec.residual = bellman_residual(table, mdp, averaged_rewards(t + 1));
      if (synchronous && mdp.discount < 1.0) {
        const std::int64_t k = t + 1;
        const double bound = range_bound / static_cast<double>(k) +
                             mdp.discount * regrets.max_abs_regret();
        const double excess = rec.residual - bound;
        if (std::isnan(result.fixed_point_bound_excess) ||
            excess > result.fixed_point_bound_excess) {
          result.fixed_point_bound_excess = excess;
        }
      }
    }
    if (config.trace.policies) {
      rec.policies.reserve(learners.size());
      rec.average_policies.reserve(learners.size());
      for (const auto& learner : learners) {
        rec.policies.push_back(learner.current_policy());
        rec.average_policies.push_back(learner.average_policy());
      }
    }
    if (config.trace.regrets) {
      rec.state_regret.resize(mdp.num_states);
      for (int s = 0; s < mdp.num_states; ++s) {
        rec.state_regret[s] = regrets.signed_regret(s);
      }
    }
    if (config.trace.expected_values) {
      rec.expected_values = policy_expected_values(q, learners);
    }
    if (config.trace.tables) {
      rec.q = q.values();
      rec.q_avg = q.avg_inclusive_table();
    }
    result.trace.push_back(std::move(rec));
  }

  void finalize(const QTable& q, const std::vector<Minimizer>& learners) {
    result.q = q;
    result.current_policies.reserve(learners.size());
    result.average_policies.reserve(learners.size());
    for (const auto& learner : learners) {
      result.current_policies.push_back(learner.current_policy());
      result.average_policies.push_back(learner.average_policy());
    }
    result.final_state_regret.resize(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) {
      result.final_state_regret[s] = regrets.signed_regret(s);
    }
  }
};

}  // namespace

void lonr_v_iteration(QTable& q, std::vector<Minimizer>& learners,
                      const MdpSpec& mdp, std::int64_t t) {
  check_learners(learners, mdp);
  // All backups read the pre-sweep snapshot, so state order is irrelevant.
  const std::vector<double> snapshot = policy_expected_values(q, learners);
  QValues next(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    next[s] = backup_row(mdp, snapshot, s, t);
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    q.row(s) = std::move(next[s]);
    q.record_update(s);
    learners[s].observe(q.row(s));
  }
}

int lonr_a_step(QTable& q, std::vector<Minimizer>& learners, const MdpSpec& mdp,
                const RunConfig& config, AsyncSelector& selector, Rng& rng,
                std::int64_t t) {
  check_learners(learners, mdp);
  const int s = config.selection == StateSelection::kUniform
                    ? next_index(rng, mdp.num_states)
                    : selector.position;
  const std::vector<double> values = policy_expected_values(q, learners);
  q.row(s) = backup_row(mdp, values, s, t);
  q.record_update(s);
  learners[s].observe(q.row(s));

  if (config.selection == StateSelection::kOnPolicy) {
    const auto& policy = learners[s].current_policy();
    ActionDistribution mixed(policy.size());
    const double epsilon = config.explore_epsilon;
    for (std::size_t a = 0; a < policy.size(); ++a) {
      mixed[a] = (1.0 - epsilon) * policy[a] + epsilon / policy.size();
    }
    const int action = sample_index(rng, mixed);
    const int next = sample_index(rng, mdp.transition[s][action]);
    selector.position = mdp.terminal[next] ? mdp.start_state : next;
  }
  return s;
}

int lonr_b_step(QTable& q, std::vector<Minimizer>& learners, const MdpSpec& mdp,
                const RunConfig& config, AsyncSelector& selector, Rng& rng,
                std::int64_t t) {
  check_learners(learners, mdp);
  if (selector.last_actions.empty()) {
    selector.last_actions.assign(mdp.num_states, 0);
  }
  const int s = config.selection == StateSelection::kUniform
                    ? next_index(rng, mdp.num_states)
                    : selector.position;
  const int action = learners[s].sample(rng);
  const double probability = learners[s].current_policy()[action];
  if (!(probability > 0.0)) {
    throw std::runtime_error("lonr_b: sampled an action with zero probability");
  }
  const int next = sample_index(rng, mdp.transition[s][action]);

  double bootstrap;
  if (config.sarsa_bandit) {
    bootstrap = q.value(next, selector.last_actions[next]);
  } else {
    const auto& next_policy = learners[next].current_policy();
    bootstrap = 0.0;
    for (std::size_t a = 0; a < next_policy.size(); ++a) {
      bootstrap += next_policy[a] * q.value(next, static_cast<int>(a));
    }
  }
  const double feedback = mdp.reward_at(t, s, action) + mdp.discount * bootstrap;
  if (!std::isfinite(feedback / probability)) {
    throw std::runtime_error("lonr: non-finite backup");
  }
  if (config.sarsa_bandit) {
    q.row(s)[action] = feedback;
  } else {
    std::fill(q.row(s).begin(), q.row(s).end(), 0.0);
    q.row(s)[action] = feedback / probability;
  }
  q.record_update(s);
  learners[s].observe_sampled(action, feedback);
  selector.last_actions[s] = action;

  if (config.selection == StateSelection::kOnPolicy) {
    selector.position = mdp.terminal[next] ? mdp.start_state : next;
  }
  return s;
}

RunResult run_lonr_v(const MdpSpec& mdp, const RunConfig& config) {
  RunConfig v_config = config;
  v_config.algorithm = Algorithm::kLonrV;
  return run_lonr(mdp, v_config);
}

RunResult run_lonr(const MdpSpec& mdp, const RunConfig& config) {
  check_config(config);
  std::vector<Minimizer> learners = make_learners(mdp, config);
  QTable q(mdp.actions_per_state, config.initial_q);
  RunRecorder recorder(mdp, config);
  Rng rng(config.seed);
  AsyncSelector selector;
  selector.position = mdp.start_state;
  recorder.result.initial_expected_values = policy_expected_values(q, learners);
  const bool synchronous = config.algorithm == Algorithm::kLonrV;
  if (!synchronous) recorder.result.selected_states.reserve(config.iterations);

  for (std::int64_t t = 0; t < config.iterations; ++t) {
    recorder.accumulate_rewards(t);
    int selected = -1;
    if (synchronous) {
      // The regret pairing matches the telescoped averages: the value each
      // state feeds its predecessors this sweep under the current policy.
      for (int s = 0; s < mdp.num_states; ++s) {
        recorder.regrets.add(s, q.row(s), learners[s].current_policy());
      }
      lonr_v_iteration(q, learners, mdp, t);
      recorder.track_range(q);
    } else if (config.algorithm == Algorithm::kLonrA) {
      selected = lonr_a_step(q, learners, mdp, config, selector, rng, t);
      recorder.regrets.add(selected, q.row(selected),
                           learners[selected].current_policy());
      recorder.track_range(q);
      recorder.result.selected_states.push_back(selected);
    } else {
      selected = lonr_b_step(q, learners, mdp, config, selector, rng, t);
      recorder.regrets.add(selected, q.row(selected),
                           learners[selected].current_policy());
      recorder.result.selected_states.push_back(selected);
    }
    if (recorder.should_record(t)) {
      recorder.record(q, learners, t, selected, synchronous);
    }
  }
  recorder.finalize(q, learners);
  return std::move(recorder.result);
}

namespace {

std::vector<std::vector<ActionDistribution>> snapshot_policies(
    const MarkovGameSpec& game,
    const std::vector<std::vector<Minimizer>>& learners) {
  std::vector<std::vector<ActionDistribution>> policies(game.num_players);
  for (int n = 0; n < game.num_players; ++n) {
    policies[n].reserve(game.num_states);
    for (int s = 0; s < game.num_states; ++s) {
      policies[n].push_back(learners[n][s].current_policy());
    }
  }
  return policies;
}

// Expected transition and reward rows for one player's actions in one state,
// with every other player folded in at its snapshot policy.
void induced_state_rows(const MarkovGameSpec& game, int player,
                        const std::vector<std::vector<ActionDistribution>>& policies,
                        int s, std::vector<double>& rewards,
                        std::vector<std::vector<double>>& kernels) {
  const int own = game.action_counts[s][player];
  rewards.assign(own, 0.0);
  kernels.assign(own, std::vector<double>(game.num_states, 0.0));
  const int joints = game.joint_action_count(s);
  for (int j = 0; j < joints; ++j) {
    const std::vector<int> actions = game.decode_joint(s, j);
    double weight = 1.0;
    for (int n = 0; n < game.num_players; ++n) {
      if (n != player) weight *= policies[n][s][actions[n]];
    }
    if (weight == 0.0) continue;
    const int a = actions[player];
    rewards[a] += weight * game.reward[player][s][j];
    for (int s2 = 0; s2 < game.num_states; ++s2) {
      kernels[a][s2] += weight * game.transition[s][j][s2];
    }
  }
}

}  // namespace

std::vector<RunResult> run_selfplay(const MarkovGameSpec& game,
                                    const RunConfig& config) {
  check_config(config);
  const int players = game.num_players;
  std::vector<std::vector<Minimizer>> learners(players);
  std::vector<QTable> tables;
  std::vector<RegretAccumulators> regrets;
  std::vector<std::vector<int>> last_actions(players);
  for (int n = 0; n < players; ++n) {
    std::vector<int> actions(game.num_states);
    for (int s = 0; s < game.num_states; ++s) actions[s] = game.action_counts[s][n];
    for (int s = 0; s < game.num_states; ++s) {
      learners[n].emplace_back(config.minimizer, actions[s], config.params);
    }
    tables.emplace_back(actions, config.initial_q);
    regrets.emplace_back(actions);
    last_actions[n].assign(game.num_states, 0);
  }

  Rng rng(config.seed);
  int position = sample_index(rng, game.initial_distribution);
  const bool synchronous = config.algorithm == Algorithm::kLonrV;

  std::vector<RunResult> results(players);
  std::vector<double> range_bound(players);
  for (int n = 0; n < players; ++n) {
    double bound = 0.0;
    for (const auto& row : game.reward[n]) {
      for (double r : row) bound = std::max(bound, std::abs(r));
    }
    range_bound[n] = game.discount < 1.0
                         ? bound / (1.0 - game.discount) + 2.0 * std::abs(config.initial_q)
                         : std::numeric_limits<double>::infinity();
    results[n].range_bound_excess = -std::numeric_limits<double>::infinity();
    results[n].fixed_point_bound_excess = std::numeric_limits<double>::quiet_NaN();
    results[n].initial_expected_values =
        policy_expected_values(tables[n], learners[n]);
  }

  std::vector<double> rewards;
  std::vector<std::vector<double>> kernels;
  for (std::int64_t t = 0; t < config.iterations; ++t) {
    const auto policies = snapshot_policies(game, learners);
    int selected = -1;
    if (synchronous) {
      for (int n = 0; n < players; ++n) {
        for (int s = 0; s < game.num_states; ++s) {
          regrets[n].add(s, tables[n].row(s), learners[n][s].current_policy());
        }
        const MdpSpec faced = induced_mdp(game, n, policies);
        lonr_v_iteration(tables[n], learners[n], faced, t);
        if (game.discount < 1.0) {
          results[n].range_bound_excess =
              std::max(results[n].range_bound_excess,
                       tables[n].max_deviation_from_initial() - range_bound[n]);
        }
      }
    } else {
      selected = config.selection == StateSelection::kUniform
                     ? next_index(rng, game.num_states)
                     : position;
      std::vector<int> joint(players, 0);
      if (config.algorithm == Algorithm::kLonrA) {
        for (int n = 0; n < players; ++n) {
          const std::vector<double> values =
              policy_expected_values(tables[n], learners[n]);
          induced_state_rows(game, n, policies, selected, rewards, kernels);
          auto& row = tables[n].row(selected);
          for (std::size_t a = 0; a < row.size(); ++a) {
            double bootstrap = 0.0;
            for (int s2 = 0; s2 < game.num_states; ++s2) {
              if (kernels[a][s2] > 0.0) bootstrap += kernels[a][s2] * values[s2];
            }
            row[a] = rewards[a] + game.discount * bootstrap;
            if (!std::isfinite(row[a])) {
              throw std::runtime_error("lonr: non-finite backup");
            }
          }
          tables[n].record_update(selected);
          learners[n][selected].observe(row);
          regrets[n].add(selected, row, learners[n][selected].current_policy());
          if (game.discount < 1.0) {
            results[n].range_bound_excess =
                std::max(results[n].range_bound_excess,
                         tables[n].max_deviation_from_initial() - range_bound[n]);
          }
        }
        // Trajectory step under the latest policies with exploration.
        for (int n = 0; n < players; ++n) {
          const auto& policy = learners[n][selected].current_policy();
          ActionDistribution mixed(policy.size());
          for (std::size_t a = 0; a < policy.size(); ++a) {
            mixed[a] = (1.0 - config.explore_epsilon) * policy[a] +
                       config.explore_epsilon / policy.size();
          }
          joint[n] = sample_index(rng, mixed);
        }
      } else {
        for (int n = 0; n < players; ++n) joint[n] = learners[n][selected].sample(rng);
      }
      const int joint_index = game.joint_index(selected, joint);
      const int next = sample_index(rng, game.transition[selected][joint_index]);
      if (config.algorithm == Algorithm::kLonrB) {
        for (int n = 0; n < players; ++n) {
          const double probability =
              learners[n][selected].current_policy()[joint[n]];
          induced_state_rows(game, n, policies, selected, rewards, kernels);
          double bootstrap;
          if (config.sarsa_bandit) {
            bootstrap = tables[n].value(next, last_actions[n][next]);
          } else {
            const auto& next_policy = learners[n][next].current_policy();
            bootstrap = 0.0;
            for (std::size_t a = 0; a < next_policy.size(); ++a) {
              bootstrap += next_policy[a] * tables[n].value(next, static_cast<int>(a));
            }
          }
          const double feedback =
              rewards[joint[n]] + game.discount * bootstrap;
          if (!std::isfinite(feedback / probability)) {
            throw std::runtime_error("lonr: non-finite backup");
          }
          auto& row = tables[n].row(selected);
          if (config.sarsa_bandit) {
            row[joint[n]] = feedback;
          } else {
            std::fill(row.begin(), row.end(), 0.0);
            row[joint[n]] = feedback / probability;
          }
          tables[n].record_update(selected);
          learners[n][selected].observe_sampled(joint[n], feedback);
          regrets[n].add(selected, row, learners[n][selected].current_policy());
          last_actions[n][selected] = joint[n];
        }
      }
      position = game.terminal[next]
                     ? sample_index(rng, game.initial_distribution)
                     : next;
      for (int n = 0; n < players; ++n) {
        results[n].selected_states.push_back(selected);
      }
    }

    const bool record =
        config.trace.enabled &&
        ((t + 1) % config.trace.every == 0 || t + 1 == config.iterations);
    if (record) {
      for (int n = 0; n < players; ++n) {
        TraceRecord rec;
        rec.iteration = t + 1;
        rec.selected_state = selected;
        rec.residual = std::numeric_limits<double>::quiet_NaN();
        if (config.trace.residual) {
          const MdpSpec faced =
              induced_mdp(game, n, snapshot_policies(game, learners));
          const QValues table = synchronous ? tables[n].avg_exclusive_table()
                                            : tables[n].avg_inclusive_table();
          rec.residual = bellman_residual(table, faced);
        }
        if (config.trace.policies) {
          for (int s = 0; s < game.num_states; ++s) {
            rec.policies.push_back(learners[n][s].current_policy());
            rec.average_policies.push_back(learners[n][s].average_policy());
          }
        }
        if (config.trace.regrets) {
          rec.state_regret.resize(game.num_states);
          for (int s = 0; s < game.num_states; ++s) {
            rec.state_regret[s] = regrets[n].signed_regret(s);
          }
        }
        if (config.trace.expected_values) {
          rec.expected_values = policy_expected_values(tables[n], learners[n]);
        }
        if (config.trace.tables) {
          rec.q = tables[n].values();
          rec.q_avg = tables[n].avg_inclusive_table();
        }
        results[n].trace.push_back(std::move(rec));
      }
    }
  }

  for (int n = 0; n < players; ++n) {
    results[n].q = tables[n];
    for (int s = 0; s < game.num_states; ++s) {
      results[n].current_policies.push_back(learners[n][s].current_policy());
      results[n].average_policies.push_back(learners[n][s].average_policy());
      results[n].final_state_regret.push_back(regrets[n].signed_regret(s));
    }
  }
  return results;
}

EvaluationResult evaluate_policies(
    const MarkovGameSpec& game,
    const std::vector<std::vector<ActionDistribution>>& policies,
    std::int64_t episodes, Rng& rng, std::int64_t step_cap) {
  if (episodes < 1) {
    throw std::invalid_argument("evaluate: need at least one episode");
  }
  if (static_cast<int>(policies.size()) != game.num_players) {
    throw std::invalid_argument("evaluate: need one policy table per player");
  }
  for (int n = 0; n < game.num_players; ++n) {
    if (static_cast<int>(policies[n].size()) != game.num_states) {
      throw std::invalid_argument("evaluate: policy table has wrong length");
    }
    for (int s = 0; s < game.num_states; ++s) {
      if (static_cast<int>(policies[n][s].size()) != game.action_counts[s][n] ||
          !is_distribution(policies[n][s])) {
        throw std::invalid_argument("evaluate: invalid policy distribution");
      }
    }
  }

  EvaluationResult out;
  out.mean_scores.assign(game.num_players, 0.0);
  const bool mirrored = !game.swap_symmetry.empty();
  int previous_start = 0;
  std::vector<int> joint(game.num_players);
  std::vector<double> episode_scores(game.num_players);
  for (std::int64_t e = 0; e < episodes; ++e) {
    int s;
    if (mirrored && e % 2 == 1) {
      s = game.swap_symmetry[previous_start];
    } else {
      s = sample_index(rng, game.initial_distribution);
      previous_start = s;
    }
    std::fill(episode_scores.begin(), episode_scores.end(), 0.0);
    bool capped = true;
    for (std::int64_t step = 0; step < step_cap; ++step) {
      if (game.terminal[s]) {
        capped = false;
        break;
      }
      for (int n = 0; n < game.num_players; ++n) {
        joint[n] = sample_index(rng, policies[n][s]);
      }
      const int j = game.joint_index(s, joint);
      for (int n = 0; n < game.num_players; ++n) {
        episode_scores[n] += game.reward[n][s][j];
      }
      s = sample_index(rng, game.transition[s][j]);
    }
    if (game.terminal[s]) capped = false;
    if (capped) {
      ++out.capped_episodes;  // counted as a 0-0 draw
      continue;
    }
    for (int n = 0; n < game.num_players; ++n) {
      out.mean_scores[n] += episode_scores[n];
    }
  }
  for (double& score : out.mean_scores) {
    score /= static_cast<double>(episodes);
  }
  return out;
}

}  // namespace lonr
