#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lonr/env_model.hpp"
#include "lonr/rng.hpp"

namespace lonr {

enum class MinimizerKind {
  kRegretMatching,
  kRegretMatchingPlus,
  kRegretMatchingPlusPlus,
  kDiscountedCfr,
  kMultiplicativeWeights,
  kOptimisticMultiplicativeWeights,
  kExp3,
};

const char* to_string(MinimizerKind kind);
MinimizerKind minimizer_kind_from_string(const std::string& name);

struct MinimizerParams {
  /// Step size for the exponential-weights family (MWU, OMWU, Exp3).
  double learning_rate = 0.1;
  /// How many times OMWU counts the most recent reward vector; must be >= 2.
  int optimism_count = 2;
  // Discounted CFR exponents: positive regrets decay by t^alpha/(t^alpha+1),
  // negative by t^beta/(t^beta+1), average contributions by (t/(t+1))^gamma.
  double dcfr_alpha = 1.5;
  double dcfr_beta = 0.0;
  double dcfr_average_gamma = 2.0;
};

/// r(a) = x(a) - pi . x for each action.
std::vector<double> instantaneous_regret(std::span<const double> rewards,
                                         const ActionDistribution& policy);

/// Average external regret of a recorded run: both histories hold one entry
/// per round, policies paired with the rewards they faced.
double empirical_regret(const std::vector<std::vector<double>>& reward_history,
                        const std::vector<ActionDistribution>& policy_history);

/// One no-regret learner over a fixed action set. Full-information kinds
/// advance with observe(); Exp3 is bandit-only and advances with
/// observe_sampled(). Updates are pure arithmetic, so identical inputs give
/// bit-identical states.
class Minimizer {
 public:
  Minimizer(MinimizerKind kind, int num_actions, MinimizerParams params = {});

  /// Reveals the full reward vector, updates trackers and policy, and
  /// accumulates the new policy into the weighted average.
  void observe(std::span<const double> rewards);

  /// Bandit feedback for the sampled action (Exp3 only). The reward is the
  /// raw observed value; importance weighting by the sampling probability
  /// happens internally.
  void observe_sampled(int action, double reward);

  /// Draws an action from the current policy.
  int sample(Rng& rng) const;

  const ActionDistribution& current_policy() const { return policy_; }
  ActionDistribution average_policy() const;

  MinimizerKind kind() const { return kind_; }
  int num_actions() const { return num_actions_; }
  std::int64_t iteration() const { return iteration_; }
  const MinimizerParams& params() const { return params_; }
  const std::vector<double>& trackers() const { return trackers_; }
  const std::vector<double>& policy_sum() const { return policy_sum_; }
  double total_weight() const { return total_weight_; }

  /// Per-action cumulative rewards and realized value over this learner's
  /// own full-information history; empirical_regret() evaluates the average
  /// external regret from them.
  const std::vector<double>& cumulative_rewards() const {
    return cumulative_rewards_;
  }
  double realized_value() const { return realized_value_; }
  double empirical_regret() const;

 private:
  void refresh_policy();
  void accumulate_average();

  MinimizerKind kind_;
  int num_actions_;
  MinimizerParams params_;
  std::int64_t iteration_ = 0;
  /// RM family: cumulative (clipped) regrets. Exponential-weights family:
  /// cumulative (importance-weighted for Exp3) rewards.
  std::vector<double> trackers_;
  std::vector<double> last_rewards_;  // OMWU optimism
  ActionDistribution policy_;
  std::vector<double> policy_sum_;
  double total_weight_ = 0.0;
  std::vector<double> cumulative_rewards_;
  double realized_value_ = 0.0;
};

}  // namespace lonr
