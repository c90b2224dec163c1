#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace lonr {

/// Probability vector over a finite action set.
using ActionDistribution = std::vector<double>;

/// Dense real table indexed by (state, action).
using QValues = std::vector<std::vector<double>>;

inline constexpr double kKernelTolerance = 1e-12;
inline constexpr double kDistributionTolerance = 1e-9;

bool is_distribution(const ActionDistribution& probs,
                     double tolerance = kDistributionTolerance);
ActionDistribution uniform_distribution(int num_actions);

/// Optional time-varying reward: (iteration, state, action) -> reward.
/// When set it overrides the static table; the transition kernel never
/// changes over time.
using RewardSchedule = std::function<double(std::int64_t, int, int)>;

/// Finite MDP (S, A, P, r, gamma). Instances are immutable after
/// construction and validation; they can be shared freely across threads.
struct MdpSpec {
  int num_states = 0;
  std::vector<int> actions_per_state;
  /// transition[s][a][s2] = P(s2 | s, a); every row sums to 1.
  std::vector<std::vector<std::vector<double>>> transition;
  /// reward[s][a] = expected immediate reward.
  std::vector<std::vector<double>> reward;
  /// Discount in [0, 1]; 1 is allowed only when every state reaches a
  /// terminal with positive probability under the uniform policy.
  double discount = 0.0;
  std::vector<bool> terminal;
  /// Declared bound on |r(s, a)|, also covering every scheduled table.
  double reward_bound = 0.0;
  /// Where on-policy trajectories start and reset after a terminal.
  int start_state = 0;
  RewardSchedule reward_schedule;

  int num_actions(int s) const { return actions_per_state[s]; }
  double reward_at(std::int64_t t, int s, int a) const;
  bool has_schedule() const { return static_cast<bool>(reward_schedule); }
};

/// Throws std::invalid_argument when an invariant is broken: rows not
/// stochastic, terminals not absorbing with zero reward, rewards above the
/// declared bound, or discount 1 on a non-episodic kernel.
void validate(const MdpSpec& mdp);

/// N-player finite Markov game over joint actions. In controller mode a
/// single player acts per state and everyone else has one dummy action.
struct MarkovGameSpec {
  int num_states = 0;
  int num_players = 0;
  /// Per-state controlling player, or -1 for joint (simultaneous) moves.
  /// Empty means every state is joint.
  std::vector<int> controller;
  /// action_counts[s][n] = number of actions for player n in state s.
  std::vector<std::vector<int>> action_counts;
  /// transition[s][j][s2] over joint action index j.
  std::vector<std::vector<std::vector<double>>> transition;
  /// reward[n][s][j] = expected immediate reward of player n.
  std::vector<std::vector<std::vector<double>>> reward;
  double discount = 0.0;
  bool zero_sum = false;
  std::vector<bool> terminal;
  /// Distribution over starting states used by rollouts and evaluation.
  std::vector<double> initial_distribution;
  /// Optional state permutation mapping the game onto itself with player
  /// roles swapped; evaluation uses it for antithetic episode pairing.
  std::vector<int> swap_symmetry;

  int num_actions(int s, int player) const { return action_counts[s][player]; }
  int controlling_player(int s) const {
    return controller.empty() ? -1 : controller[s];
  }
  int joint_action_count(int s) const;
  /// Mixed-radix joint index with player 0 varying fastest.
  int joint_index(int s, const std::vector<int>& actions) const;
  std::vector<int> decode_joint(int s, int joint) const;
};

void validate(const MarkovGameSpec& game);

// --- Example environments ---------------------------------------------------

inline constexpr int kKeep = 0;
inline constexpr int kSend = 1;

/// Two-state, two-player game with no stationary deterministic equilibrium:
/// state 0 is controlled by player 0, state 1 by player 1, each choosing
/// between keeping the token (self-loop) and sending it across.
MarkovGameSpec make_nosde(double discount);

enum GridAction { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3 };

/// Cliff-walking grid: start bottom-left, zero-payoff terminal bottom-right,
/// and the bottom row strictly between them is a cliff of -100 terminals.
/// Every move costs 1; moves off the edge keep the position; gamma = 1.
/// State index = row * cols + col with row 0 at the bottom.
MdpSpec make_cliff_grid(int rows, int cols);

inline constexpr int kSoccerActions = 5;  // N, S, E, W, STICK
inline constexpr int kStick = 4;
inline constexpr int kSoccerTerminal = 24;

/// Index of a live soccer state; positions are middle cells 0..3
/// (cell = row * 2 + inner column), ball_owner in {0, 1}.
int soccer_state_index(int pos_a, int pos_b, int ball_owner);

/// Two-player zero-sum grid soccer on a 2x4 field. Columns 0 and 3 are goal
/// zones; players move within the middle 2x2. Joint moves resolve in a
/// uniformly random order; moving into the occupied cell bounces the mover
/// and hands the ball to the stationary player; the ball owner entering a
/// goal column scores +100/-100 and ends the game. gamma = 0.9.
MarkovGameSpec make_soccer();

/// Single-state two-player game from a pair of equally shaped payoff
/// matrices (row player 0, column player 1). Default discount 0 reduces
/// self-play to plain no-regret learning on the matrix game.
MarkovGameSpec make_matrix_game(const std::vector<std::vector<double>>& payoff_p0,
                                const std::vector<std::vector<double>>& payoff_p1,
                                double discount = 0.0);

/// Deterministic function of the seed: transition rows are normalized
/// positive draws, rewards uniform in [0, 1), no terminals.
MdpSpec make_random_mdp(std::uint64_t seed, int num_states, int num_actions,
                        double discount);

/// Single-agent MDP faced by `player` when every opponent plays its current
/// mixed policy: transitions and rewards are expectations over the
/// opponents' joint action. `policies[n][s]` is player n's distribution in
/// state s; the entry for `player` itself is ignored.
MdpSpec induced_mdp(const MarkovGameSpec& game, int player,
                    const std::vector<std::vector<ActionDistribution>>& policies);

}  // namespace lonr
