#include "lonr/minimizers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lonr {

const char* to_string(MinimizerKind kind) {
  switch (kind) {
    case MinimizerKind::kRegretMatching: return "rm";
    case MinimizerKind::kRegretMatchingPlus: return "rm_plus";
    case MinimizerKind::kRegretMatchingPlusPlus: return "rm_plus_plus";
    case MinimizerKind::kDiscountedCfr: return "dcfr";
    case MinimizerKind::kMultiplicativeWeights: return "mwu";
    case MinimizerKind::kOptimisticMultiplicativeWeights: return "omwu";
    case MinimizerKind::kExp3: return "exp3";
  }
  return "unknown";
}

MinimizerKind minimizer_kind_from_string(const std::string& name) {
  for (MinimizerKind kind :
       {MinimizerKind::kRegretMatching, MinimizerKind::kRegretMatchingPlus,
        MinimizerKind::kRegretMatchingPlusPlus, MinimizerKind::kDiscountedCfr,
        MinimizerKind::kMultiplicativeWeights,
        MinimizerKind::kOptimisticMultiplicativeWeights, MinimizerKind::kExp3}) {
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown minimizer kind: " + name);
}

std::vector<double> instantaneous_regret(std::span<const double> rewards,
                                         const ActionDistribution& policy) {
  if (rewards.size() != policy.size()) {
    throw std::invalid_argument("instantaneous regret: dimension mismatch");
  }
  double expected = 0.0;
  for (std::size_t a = 0; a < rewards.size(); ++a) expected += policy[a] * rewards[a];
  std::vector<double> regret(rewards.size());
  for (std::size_t a = 0; a < rewards.size(); ++a) regret[a] = rewards[a] - expected;
  return regret;
}

double empirical_regret(const std::vector<std::vector<double>>& reward_history,
                        const std::vector<ActionDistribution>& policy_history) {
  if (reward_history.empty() || reward_history.size() != policy_history.size()) {
    throw std::invalid_argument("empirical regret: histories empty or of unequal length");
  }
  const std::size_t num_actions = reward_history[0].size();
  std::vector<double> cumulative(num_actions, 0.0);
  double realized = 0.0;
  for (std::size_t t = 0; t < reward_history.size(); ++t) {
    const auto& rewards = reward_history[t];
    const auto& policy = policy_history[t];
    if (rewards.size() != num_actions || policy.size() != num_actions) {
      throw std::invalid_argument("empirical regret: inconsistent dimensions");
    }
    for (std::size_t a = 0; a < num_actions; ++a) {
      cumulative[a] += rewards[a];
      realized += policy[a] * rewards[a];
    }
  }
  const double best = *std::max_element(cumulative.begin(), cumulative.end());
  return (best - realized) / static_cast<double>(reward_history.size());
}

Minimizer::Minimizer(MinimizerKind kind, int num_actions, MinimizerParams params)
    : kind_(kind), num_actions_(num_actions), params_(params) {
  if (num_actions < 1) {
    throw std::invalid_argument("minimizer: need at least one action");
  }
  const bool exponential = kind == MinimizerKind::kMultiplicativeWeights ||
                           kind == MinimizerKind::kOptimisticMultiplicativeWeights ||
                           kind == MinimizerKind::kExp3;
  if (exponential && !(params.learning_rate > 0.0)) {
    throw std::invalid_argument("minimizer: learning rate must be positive");
  }
  if (kind == MinimizerKind::kOptimisticMultiplicativeWeights &&
      params.optimism_count < 2) {
    throw std::invalid_argument("minimizer: optimism count must be at least 2");
  }
  if (kind == MinimizerKind::kDiscountedCfr &&
      (params.dcfr_alpha < 0.0 || params.dcfr_average_gamma < 0.0)) {
    throw std::invalid_argument("minimizer: invalid discounting parameters");
  }
  trackers_.assign(num_actions_, 0.0);
  last_rewards_.assign(num_actions_, 0.0);
  policy_sum_.assign(num_actions_, 0.0);
  cumulative_rewards_.assign(num_actions_, 0.0);
  policy_ = uniform_distribution(num_actions_);
}

void Minimizer::refresh_policy() {
  switch (kind_) {
    case MinimizerKind::kRegretMatching:
    case MinimizerKind::kRegretMatchingPlus:
    case MinimizerKind::kRegretMatchingPlusPlus:
    case MinimizerKind::kDiscountedCfr: {
      double positive_sum = 0.0;
      for (double r : trackers_) positive_sum += std::max(r, 0.0);
      if (positive_sum > 0.0) {
        for (int a = 0; a < num_actions_; ++a) {
          policy_[a] = std::max(trackers_[a], 0.0) / positive_sum;
        }
      } else {
        policy_ = uniform_distribution(num_actions_);
      }
      return;
    }
    case MinimizerKind::kMultiplicativeWeights:
    case MinimizerKind::kOptimisticMultiplicativeWeights:
    case MinimizerKind::kExp3: {
      const int extra = kind_ == MinimizerKind::kOptimisticMultiplicativeWeights
                            ? params_.optimism_count - 1
                            : 0;
      std::vector<double> exponent(num_actions_);
      double top = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < num_actions_; ++a) {
        exponent[a] =
            params_.learning_rate * (trackers_[a] + extra * last_rewards_[a]);
        top = std::max(top, exponent[a]);
      }
      double sum = 0.0;
      for (int a = 0; a < num_actions_; ++a) {
        exponent[a] = std::exp(exponent[a] - top);
        sum += exponent[a];
      }
      for (int a = 0; a < num_actions_; ++a) policy_[a] = exponent[a] / sum;
      if (kind_ == MinimizerKind::kExp3 && num_actions_ > 1) {
        // Exploration mix for the upcoming round.
        const double n = num_actions_;
        const double round = static_cast<double>(iteration_ + 1);
        const double epsilon = std::min(1.0, std::sqrt(n * std::log(n) / round));
        for (int a = 0; a < num_actions_; ++a) {
          policy_[a] = (1.0 - epsilon) * policy_[a] + epsilon / n;
        }
      }
      return;
    }
  }
}

void Minimizer::accumulate_average() {
  double weight = 1.0;
  if (kind_ == MinimizerKind::kRegretMatchingPlus) {
    weight = static_cast<double>(iteration_);  // linear averaging
  } else if (kind_ == MinimizerKind::kDiscountedCfr) {
    const double t = static_cast<double>(iteration_);
    const double decay = std::pow(t / (t + 1.0), params_.dcfr_average_gamma);
    for (double& p : policy_sum_) p *= decay;
    total_weight_ *= decay;
  }
  for (int a = 0; a < num_actions_; ++a) policy_sum_[a] += weight * policy_[a];
  total_weight_ += weight;
}

void Minimizer::observe(std::span<const double> rewards) {
  if (kind_ == MinimizerKind::kExp3) {
    throw std::logic_error("exp3 is bandit-only; use observe_sampled");
  }
  if (static_cast<int>(rewards.size()) != num_actions_) {
    throw std::invalid_argument("observe: dimension mismatch");
  }
  for (double x : rewards) {
    if (!std::isfinite(x)) throw std::invalid_argument("observe: non-finite reward");
  }

  double expected = 0.0;
  for (int a = 0; a < num_actions_; ++a) expected += policy_[a] * rewards[a];
  for (int a = 0; a < num_actions_; ++a) {
    cumulative_rewards_[a] += rewards[a];
  }
  realized_value_ += expected;

  ++iteration_;
  switch (kind_) {
    case MinimizerKind::kRegretMatching:
      for (int a = 0; a < num_actions_; ++a) trackers_[a] += rewards[a] - expected;
      break;
    case MinimizerKind::kRegretMatchingPlus:
      for (int a = 0; a < num_actions_; ++a) {
        trackers_[a] = std::max(trackers_[a] + rewards[a] - expected, 0.0);
      }
      break;
    case MinimizerKind::kRegretMatchingPlusPlus:
      for (int a = 0; a < num_actions_; ++a) {
        trackers_[a] += std::max(rewards[a] - expected, 0.0);
      }
      break;
    case MinimizerKind::kDiscountedCfr: {
      const double t = static_cast<double>(iteration_);
      const double pos = std::pow(t, params_.dcfr_alpha);
      const double neg = std::pow(t, params_.dcfr_beta);
      const double pos_decay = pos / (pos + 1.0);
      const double neg_decay = neg / (neg + 1.0);
      for (int a = 0; a < num_actions_; ++a) {
        trackers_[a] += rewards[a] - expected;
        trackers_[a] *= trackers_[a] > 0.0 ? pos_decay : neg_decay;
      }
      break;
    }
    case MinimizerKind::kMultiplicativeWeights:
    case MinimizerKind::kOptimisticMultiplicativeWeights:
      for (int a = 0; a < num_actions_; ++a) {
        trackers_[a] += rewards[a];
        last_rewards_[a] = rewards[a];
      }
      break;
    case MinimizerKind::kExp3:
      break;  // unreachable
  }
  refresh_policy();
  accumulate_average();
}

void Minimizer::observe_sampled(int action, double reward) {
  if (kind_ != MinimizerKind::kExp3) {
    throw std::logic_error("observe_sampled requires a bandit-capable minimizer");
  }
  if (action < 0 || action >= num_actions_) {
    throw std::invalid_argument("observe_sampled: action out of range");
  }
  if (!std::isfinite(reward)) {
    throw std::invalid_argument("observe_sampled: non-finite reward");
  }
  const double probability = policy_[action];
  assert(probability > 0.0 && "sampled action must have positive probability");

  cumulative_rewards_[action] += reward / probability;
  realized_value_ += reward;

  ++iteration_;
  trackers_[action] += reward / probability;
  refresh_policy();
  accumulate_average();
}

int Minimizer::sample(Rng& rng) const { return sample_index(rng, policy_); }

ActionDistribution Minimizer::average_policy() const {
  if (total_weight_ <= 0.0) return uniform_distribution(num_actions_);
  ActionDistribution average(num_actions_);
  for (int a = 0; a < num_actions_; ++a) average[a] = policy_sum_[a] / total_weight_;
  return average;
}

double Minimizer::empirical_regret() const {
  if (iteration_ == 0) return 0.0;
  const double best =
      *std::max_element(cumulative_rewards_.begin(), cumulative_rewards_.end());
  return (best - realized_value_) / static_cast<double>(iteration_);
}

}  // namespace lonr
