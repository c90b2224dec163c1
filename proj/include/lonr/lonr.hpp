#pragma once

#include <cstdint>
#include <vector>

#include "lonr/env_model.hpp"
#include "lonr/minimizers.hpp"
#include "lonr/rng.hpp"

namespace lonr {

/// Dense (state, action) value table with the running averages the
/// convergence analysis is stated in: avg_inclusive is the mean of the
/// values written at this state's updates, avg_exclusive the mean of the
/// values read before them. The two differ by exactly
/// (current - initial) / count.
class QTable {
 public:
  QTable() = default;
  QTable(const std::vector<int>& actions_per_state, double initial_value);

  double value(int s, int a) const { return values_[s][a]; }
  std::vector<double>& row(int s) { return values_[s]; }
  const std::vector<double>& row(int s) const { return values_[s]; }
  const QValues& values() const { return values_; }
  const QValues& initial() const { return initial_; }
  int num_states() const { return static_cast<int>(values_.size()); }

  /// Adds the state's current row to its running sum and bumps its counter.
  void record_update(int s);

  std::int64_t update_count(int s) const { return counts_[s]; }
  double avg_inclusive(int s, int a) const;
  double avg_exclusive(int s, int a) const;
  QValues avg_inclusive_table() const;
  QValues avg_exclusive_table() const;

  /// Max |current - initial| over all entries.
  double max_deviation_from_initial() const;

 private:
  QValues values_;
  QValues initial_;
  QValues sums_;
  std::vector<std::int64_t> counts_;
};

enum class Algorithm { kLonrV, kLonrA, kLonrB };
enum class StateSelection { kUniform, kOnPolicy };

const char* to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);
const char* to_string(StateSelection selection);
StateSelection state_selection_from_string(const std::string& name);

struct TraceOptions {
  bool enabled = false;
  /// Record every n-th iteration (and always the last one).
  std::int64_t every = 1;
  bool policies = true;
  bool tables = true;
  /// Residuals cost a full Bellman sweep per record.
  bool residual = true;
  bool regrets = true;
  /// Per-state expected values under the current policy, needed by the
  /// bootstrap-discrepancy diagnostic of asynchronous runs.
  bool expected_values = false;
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kLonrV;
  MinimizerKind minimizer = MinimizerKind::kRegretMatchingPlusPlus;
  MinimizerParams params;
  std::int64_t iterations = 1;
  std::uint64_t seed = 1;
  StateSelection selection = StateSelection::kUniform;
  /// Uniform-exploration mix for on-policy state selection.
  double explore_epsilon = 0.1;
  double initial_q = 0.0;
  /// Off-by-default bandit variant: back up the successor with the action
  /// it chose at its own last update instead of importance weighting.
  bool sarsa_bandit = false;
  TraceOptions trace;
};

struct TraceRecord {
  std::int64_t iteration = 0;
  /// State updated this iteration; -1 means every state (synchronous sweep).
  int selected_state = -1;
  /// Residual of the averaged table: exclusive average for synchronous
  /// runs, per-state inclusive average for asynchronous ones. NaN when not
  /// recorded.
  double residual = 0.0;
  std::vector<ActionDistribution> policies;
  std::vector<ActionDistribution> average_policies;
  /// Signed per-state average regret of the value stream feeding the
  /// backups (hindsight-best action minus realized, divided by the count).
  std::vector<double> state_regret;
  std::vector<double> expected_values;
  QValues q;
  QValues q_avg;
};

struct RunResult {
  QTable q;
  std::vector<ActionDistribution> current_policies;
  std::vector<ActionDistribution> average_policies;
  std::vector<double> final_state_regret;
  std::vector<TraceRecord> trace;
  /// Expected values per state before the first iteration (diagnostics).
  std::vector<double> initial_expected_values;
  std::vector<int> selected_states;  // per iteration; empty for LONR-V
  /// Max over iterations of ||Q_k - Q_0||inf minus its bound
  /// ||r||inf / (1 - gamma) + 2 ||Q_0||inf; only tracked for gamma < 1.
  double range_bound_excess = 0.0;
  /// Max over recorded iterations of the averaged-table residual minus
  /// (1/k)(||r||inf / (1-gamma) + 2||Q_0||inf) + gamma * max-regret.
  /// NaN when residuals were not recorded.
  double fixed_point_bound_excess = 0.0;
};

/// One synchronous sweep at iteration t: every (s, a) entry is backed up
/// from the pre-sweep snapshot, then every state's learner observes its new
/// row and the running averages advance.
void lonr_v_iteration(QTable& q, std::vector<Minimizer>& learners,
                      const MdpSpec& mdp, std::int64_t t);

/// Trajectory state for asynchronous runs. The bandit variant also keeps
/// each state's most recent action for the SARSA-style bootstrap option.
struct AsyncSelector {
  int position = 0;
  std::vector<int> last_actions;
};

/// One asynchronous update: selects a state (uniformly or from the
/// on-policy trajectory), backs up all of its actions against the latest
/// values elsewhere, and advances only that state's learner and averages.
/// Returns the selected state.
int lonr_a_step(QTable& q, std::vector<Minimizer>& learners, const MdpSpec& mdp,
                const RunConfig& config, AsyncSelector& selector, Rng& rng,
                std::int64_t t);

/// Bandit update: samples one action from the learner's policy and one
/// successor from the kernel; the chosen entry gets the importance-weighted
/// backup, the rest of the row is zeroed, and the learner receives the raw
/// backup value for the chosen arm.
int lonr_b_step(QTable& q, std::vector<Minimizer>& learners, const MdpSpec& mdp,
                const RunConfig& config, AsyncSelector& selector, Rng& rng,
                std::int64_t t);

/// Runs the configured variant for config.iterations iterations.
RunResult run_lonr(const MdpSpec& mdp, const RunConfig& config);
RunResult run_lonr_v(const MdpSpec& mdp, const RunConfig& config);

/// Centralized self-play: every iteration each player faces the MDP induced
/// by the other players' pre-iteration policies and applies one LONR
/// iteration; all players advance simultaneously. Asynchronous variants
/// share one selected state per iteration.
std::vector<RunResult> run_selfplay(const MarkovGameSpec& game,
                                    const RunConfig& config);

struct EvaluationResult {
  std::vector<double> mean_scores;
  std::int64_t capped_episodes = 0;
};

/// Plays complete games from the game's initial distribution under fixed
/// per-player policies and returns mean undiscounted scores. Episodes
/// exceeding step_cap count as 0-0 draws and are flagged. When the game has
/// a swap symmetry, episodes are antithetically paired through it.
EvaluationResult evaluate_policies(
    const MarkovGameSpec& game,
    const std::vector<std::vector<ActionDistribution>>& policies,
    std::int64_t episodes, Rng& rng, std::int64_t step_cap = 10000);

}  // namespace lonr
