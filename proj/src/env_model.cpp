#include "lonr/env_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "lonr/rng.hpp"

namespace lonr {

bool is_distribution(const ActionDistribution& probs, double tolerance) {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

ActionDistribution uniform_distribution(int num_actions) {
  return ActionDistribution(num_actions, 1.0 / num_actions);
}

double MdpSpec::reward_at(std::int64_t t, int s, int a) const {
  if (!reward_schedule) return reward[s][a];
  const double r = reward_schedule(t, s, a);
  if (!std::isfinite(r) || std::abs(r) > reward_bound) {
    throw std::invalid_argument("scheduled reward at t=" + std::to_string(t) +
                                " exceeds the declared reward bound");
  }
  return r;
}

namespace {

void check_row(const std::vector<double>& row, const std::string& what) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument(what + ": kernel entries must be finite and >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kKernelTolerance) {
    throw std::invalid_argument(what + ": kernel row must sum to 1");
  }
}

// Every state must reach a terminal with positive probability under the
// uniform policy; equivalently every state is connected to the terminal set
// in the support graph.
bool episodic_under_uniform(const MdpSpec& mdp) {
  std::vector<bool> reaches(mdp.num_states, false);
  std::deque<int> frontier;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.terminal[s]) {
      reaches[s] = true;
      frontier.push_back(s);
    }
  }
  if (frontier.empty()) return false;
  // Backward BFS over support edges.
  while (!frontier.empty()) {
    const int target = frontier.front();
    frontier.pop_front();
    for (int s = 0; s < mdp.num_states; ++s) {
      if (reaches[s]) continue;
      bool edge = false;
      for (int a = 0; a < mdp.num_actions(s) && !edge; ++a) {
        edge = mdp.transition[s][a][target] > 0.0;
      }
      if (edge) {
        reaches[s] = true;
        frontier.push_back(s);
      }
    }
  }
  return std::all_of(reaches.begin(), reaches.end(), [](bool b) { return b; });
}

}  // namespace

void validate(const MdpSpec& mdp) {
  if (mdp.num_states < 1) throw std::invalid_argument("mdp: need at least one state");
  if (static_cast<int>(mdp.actions_per_state.size()) != mdp.num_states ||
      static_cast<int>(mdp.transition.size()) != mdp.num_states ||
      static_cast<int>(mdp.reward.size()) != mdp.num_states ||
      static_cast<int>(mdp.terminal.size()) != mdp.num_states) {
    throw std::invalid_argument("mdp: per-state table sizes disagree with num_states");
  }
  if (!(mdp.discount >= 0.0 && mdp.discount <= 1.0)) {
    throw std::invalid_argument("mdp: discount must lie in [0, 1]");
  }
  if (!(mdp.reward_bound >= 0.0) || !std::isfinite(mdp.reward_bound)) {
    throw std::invalid_argument("mdp: reward bound must be finite and >= 0");
  }
  if (mdp.start_state < 0 || mdp.start_state >= mdp.num_states) {
    throw std::invalid_argument("mdp: start state out of range");
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    const int na = mdp.actions_per_state[s];
    if (na < 1) throw std::invalid_argument("mdp: every state needs an action");
    if (static_cast<int>(mdp.transition[s].size()) != na ||
        static_cast<int>(mdp.reward[s].size()) != na) {
      throw std::invalid_argument("mdp: action table sizes disagree");
    }
    for (int a = 0; a < na; ++a) {
      if (static_cast<int>(mdp.transition[s][a].size()) != mdp.num_states) {
        throw std::invalid_argument("mdp: kernel row has wrong length");
      }
      check_row(mdp.transition[s][a], "mdp");
      const double r = mdp.reward[s][a];
      if (!std::isfinite(r)) throw std::invalid_argument("mdp: rewards must be finite");
      if (std::abs(r) > mdp.reward_bound) {
        throw std::invalid_argument("mdp: |reward| exceeds the declared bound");
      }
      if (mdp.terminal[s]) {
        if (std::abs(mdp.transition[s][a][s] - 1.0) > kKernelTolerance) {
          throw std::invalid_argument("mdp: terminal states must self-loop");
        }
        if (r != 0.0) {
          throw std::invalid_argument("mdp: terminal states must have zero reward");
        }
      }
    }
  }
  if (mdp.discount == 1.0 && !episodic_under_uniform(mdp)) {
    throw std::invalid_argument(
        "mdp: discount 1 requires every state to reach a terminal under the uniform policy");
  }
}

int MarkovGameSpec::joint_action_count(int s) const {
  int count = 1;
  for (int n = 0; n < num_players; ++n) count *= action_counts[s][n];
  return count;
}

int MarkovGameSpec::joint_index(int s, const std::vector<int>& actions) const {
  int index = 0;
  int stride = 1;
  for (int n = 0; n < num_players; ++n) {
    index += stride * actions[n];
    stride *= action_counts[s][n];
  }
  return index;
}

std::vector<int> MarkovGameSpec::decode_joint(int s, int joint) const {
  std::vector<int> actions(num_players);
  for (int n = 0; n < num_players; ++n) {
    actions[n] = joint % action_counts[s][n];
    joint /= action_counts[s][n];
  }
  return actions;
}

void validate(const MarkovGameSpec& game) {
  if (game.num_states < 1 || game.num_players < 1) {
    throw std::invalid_argument("game: need at least one state and one player");
  }
  if (static_cast<int>(game.action_counts.size()) != game.num_states ||
      static_cast<int>(game.transition.size()) != game.num_states ||
      static_cast<int>(game.terminal.size()) != game.num_states ||
      static_cast<int>(game.reward.size()) != game.num_players) {
    throw std::invalid_argument("game: table sizes disagree");
  }
  if (!game.controller.empty() &&
      static_cast<int>(game.controller.size()) != game.num_states) {
    throw std::invalid_argument("game: controller table has wrong length");
  }
  if (!(game.discount >= 0.0 && game.discount <= 1.0)) {
    throw std::invalid_argument("game: discount must lie in [0, 1]");
  }
  if (static_cast<int>(game.initial_distribution.size()) != game.num_states ||
      !is_distribution(game.initial_distribution)) {
    throw std::invalid_argument("game: initial distribution invalid");
  }
  if (!game.swap_symmetry.empty()) {
    if (static_cast<int>(game.swap_symmetry.size()) != game.num_states) {
      throw std::invalid_argument("game: swap symmetry has wrong length");
    }
    std::vector<bool> seen(game.num_states, false);
    for (int s : game.swap_symmetry) {
      if (s < 0 || s >= game.num_states || seen[s]) {
        throw std::invalid_argument("game: swap symmetry is not a permutation");
      }
      seen[s] = true;
    }
  }
  for (int s = 0; s < game.num_states; ++s) {
    if (static_cast<int>(game.action_counts[s].size()) != game.num_players) {
      throw std::invalid_argument("game: action counts have wrong shape");
    }
    const int ctrl = game.controlling_player(s);
    if (ctrl < -1 || ctrl >= game.num_players) {
      throw std::invalid_argument("game: controller index out of range");
    }
    for (int n = 0; n < game.num_players; ++n) {
      const int na = game.action_counts[s][n];
      if (na < 1) throw std::invalid_argument("game: every player needs an action");
      if (ctrl >= 0 && n != ctrl && na != 1) {
        throw std::invalid_argument(
            "game: non-controlling players must have exactly one action");
      }
    }
    const int joints = game.joint_action_count(s);
    if (static_cast<int>(game.transition[s].size()) != joints) {
      throw std::invalid_argument("game: joint transition table has wrong shape");
    }
    for (int j = 0; j < joints; ++j) {
      if (static_cast<int>(game.transition[s][j].size()) != game.num_states) {
        throw std::invalid_argument("game: kernel row has wrong length");
      }
      check_row(game.transition[s][j], "game");
      double total = 0.0;
      for (int n = 0; n < game.num_players; ++n) {
        if (static_cast<int>(game.reward[n].size()) != game.num_states ||
            static_cast<int>(game.reward[n][s].size()) != joints) {
          throw std::invalid_argument("game: reward table has wrong shape");
        }
        const double r = game.reward[n][s][j];
        if (!std::isfinite(r)) throw std::invalid_argument("game: rewards must be finite");
        total += r;
        if (game.terminal[s] && r != 0.0) {
          throw std::invalid_argument("game: terminal states must have zero reward");
        }
      }
      if (game.zero_sum && std::abs(total) > kDistributionTolerance) {
        throw std::invalid_argument("game: zero-sum flag broken by reward entry");
      }
      if (game.terminal[s] &&
          std::abs(game.transition[s][j][s] - 1.0) > kKernelTolerance) {
        throw std::invalid_argument("game: terminal states must self-loop");
      }
    }
  }
}

MarkovGameSpec make_nosde(double discount) {
  if (!(discount > 0.0 && discount < 1.0)) {
    throw std::invalid_argument("nosde: discount must lie in (0, 1)");
  }
  MarkovGameSpec game;
  game.num_states = 2;
  game.num_players = 2;
  game.controller = {0, 1};
  game.action_counts = {{2, 1}, {1, 2}};
  game.discount = discount;
  game.terminal = {false, false};
  game.initial_distribution = {1.0, 0.0};
  // Joint action index equals the controller's action in both states.
  game.transition = {
      {{1.0, 0.0}, {0.0, 1.0}},  // state 0: KEEP stays, SEND moves to 1
      {{0.0, 1.0}, {1.0, 0.0}},  // state 1: KEEP stays, SEND moves to 0
  };
  game.reward = {
      {{1.0, 0.0}, {3.0, 0.0}},  // player 0: keep pays 1 in state 0, 3 in state 1
      {{0.0, 3.0}, {1.0, 0.0}},  // player 1: paid 3 when sent to, 1 for keeping
  };
  validate(game);
  return game;
}

MdpSpec make_cliff_grid(int rows, int cols) {
  if (rows < 2 || cols < 3) {
    throw std::invalid_argument(
        "cliff grid: need at least 2 rows and 3 columns for start, goal and a cliff");
  }
  const int num_states = rows * cols;
  const auto index = [cols](int row, int col) { return row * cols + col; };
  const int goal = index(0, cols - 1);

  MdpSpec mdp;
  mdp.num_states = num_states;
  mdp.actions_per_state.assign(num_states, 4);
  mdp.discount = 1.0;
  mdp.reward_bound = 100.0;
  mdp.start_state = index(0, 0);
  mdp.terminal.assign(num_states, false);
  mdp.terminal[goal] = true;
  for (int col = 1; col < cols - 1; ++col) mdp.terminal[index(0, col)] = true;

  const int row_delta[4] = {1, -1, 0, 0};  // N, S, E, W
  const int col_delta[4] = {0, 0, 1, -1};
  mdp.transition.assign(num_states, {});
  mdp.reward.assign(num_states, {});
  for (int row = 0; row < rows; ++row) {
    for (int col = 0; col < cols; ++col) {
      const int s = index(row, col);
      mdp.transition[s].assign(4, std::vector<double>(num_states, 0.0));
      mdp.reward[s].assign(4, 0.0);
      for (int a = 0; a < 4; ++a) {
        if (mdp.terminal[s]) {
          mdp.transition[s][a][s] = 1.0;
          continue;
        }
        int next_row = row + row_delta[a];
        int next_col = col + col_delta[a];
        if (next_row < 0 || next_row >= rows || next_col < 0 || next_col >= cols) {
          next_row = row;
          next_col = col;
        }
        const int next = index(next_row, next_col);
        mdp.transition[s][a][next] = 1.0;
        const bool into_cliff = mdp.terminal[next] && next != goal;
        mdp.reward[s][a] = into_cliff ? -100.0 : -1.0;
      }
    }
  }
  validate(mdp);
  return mdp;
}

namespace {

// Live soccer states enumerate (pos_a, pos_b, ball) with distinct positions.
int soccer_compact_index(int pos_a, int pos_b, int ball) {
  // pos_b is re-indexed among the three cells not occupied by pos_a.
  const int b_rank = pos_b < pos_a ? pos_b : pos_b - 1;
  return (pos_a * 3 + b_rank) * 2 + ball;
}

struct SoccerOutcome {
  int next_state = 0;
  double reward_a = 0.0;
};

// Applies both moves in the given order; scoring ends the game immediately.
SoccerOutcome resolve_soccer(int pos_a, int pos_b, int ball, int action_a,
                             int action_b, bool a_first) {
  const int row_delta[kSoccerActions] = {1, -1, 0, 0, 0};
  const int col_delta[kSoccerActions] = {0, 0, 1, -1, 0};
  int pos[2] = {pos_a, pos_b};
  const int action[2] = {action_a, action_b};
  const int order[2] = {a_first ? 0 : 1, a_first ? 1 : 0};
  for (int step = 0; step < 2; ++step) {
    const int mover = order[step];
    const int other = 1 - mover;
    const int row = pos[mover] / 2;
    const int col = 1 + pos[mover] % 2;  // absolute column on the 2x4 field
    const int next_row = row + row_delta[action[mover]];
    const int next_col = col + col_delta[action[mover]];
    if (next_row < 0 || next_row > 1) continue;  // off the field: bounce
    if (next_col == 0 || next_col == 3) {
      if (ball == mover) {
        // Ball owner entered a goal column: score and terminate.
        return {kSoccerTerminal, mover == 0 ? 100.0 : -100.0};
      }
      continue;  // goal zones are off limits without the ball
    }
    const int next_cell = next_row * 2 + (next_col - 1);
    if (next_cell == pos[other]) {
      // Collision: the mover bounces and the stationary player takes the ball.
      if (ball == mover) ball = other;
      continue;
    }
    pos[mover] = next_cell;
  }
  return {soccer_compact_index(pos[0], pos[1], ball), 0.0};
}

}  // namespace

int soccer_state_index(int pos_a, int pos_b, int ball_owner) {
  if (pos_a < 0 || pos_a > 3 || pos_b < 0 || pos_b > 3 || pos_a == pos_b ||
      (ball_owner != 0 && ball_owner != 1)) {
    throw std::invalid_argument("soccer: invalid state components");
  }
  return soccer_compact_index(pos_a, pos_b, ball_owner);
}

MarkovGameSpec make_soccer() {
  constexpr int kLiveStates = 24;
  constexpr int kNumStates = kLiveStates + 1;

  MarkovGameSpec game;
  game.num_states = kNumStates;
  game.num_players = 2;
  game.discount = 0.9;
  game.zero_sum = true;
  game.terminal.assign(kNumStates, false);
  game.terminal[kSoccerTerminal] = true;
  game.action_counts.assign(kNumStates, {kSoccerActions, kSoccerActions});
  game.action_counts[kSoccerTerminal] = {1, 1};
  game.initial_distribution.assign(kNumStates, 0.0);
  for (int s = 0; s < kLiveStates; ++s) {
    game.initial_distribution[s] = 1.0 / kLiveStates;
  }
  game.swap_symmetry.assign(kNumStates, 0);
  game.swap_symmetry[kSoccerTerminal] = kSoccerTerminal;

  game.transition.assign(kNumStates, {});
  game.reward.assign(2, std::vector<std::vector<double>>(kNumStates));
  for (int pos_a = 0; pos_a < 4; ++pos_a) {
    for (int pos_b = 0; pos_b < 4; ++pos_b) {
      if (pos_a == pos_b) continue;
      for (int ball = 0; ball < 2; ++ball) {
        const int s = soccer_compact_index(pos_a, pos_b, ball);
        game.swap_symmetry[s] = soccer_compact_index(pos_b, pos_a, 1 - ball);
        const int joints = kSoccerActions * kSoccerActions;
        game.transition[s].assign(joints, std::vector<double>(kNumStates, 0.0));
        game.reward[0][s].assign(joints, 0.0);
        game.reward[1][s].assign(joints, 0.0);
        for (int action_a = 0; action_a < kSoccerActions; ++action_a) {
          for (int action_b = 0; action_b < kSoccerActions; ++action_b) {
            const int j = action_a + kSoccerActions * action_b;
            for (bool a_first : {true, false}) {
              const SoccerOutcome out =
                  resolve_soccer(pos_a, pos_b, ball, action_a, action_b, a_first);
              game.transition[s][j][out.next_state] += 0.5;
              game.reward[0][s][j] += 0.5 * out.reward_a;
              game.reward[1][s][j] -= 0.5 * out.reward_a;
            }
          }
        }
      }
    }
  }
  game.transition[kSoccerTerminal].assign(1, std::vector<double>(kNumStates, 0.0));
  game.transition[kSoccerTerminal][0][kSoccerTerminal] = 1.0;
  game.reward[0][kSoccerTerminal].assign(1, 0.0);
  game.reward[1][kSoccerTerminal].assign(1, 0.0);

  validate(game);
  return game;
}

MarkovGameSpec make_matrix_game(const std::vector<std::vector<double>>& payoff_p0,
                                const std::vector<std::vector<double>>& payoff_p1,
                                double discount) {
  const int rows = static_cast<int>(payoff_p0.size());
  if (rows == 0 || payoff_p1.size() != payoff_p0.size()) {
    throw std::invalid_argument("matrix game: payoff matrices must share shape");
  }
  const int cols = static_cast<int>(payoff_p0[0].size());
  for (const auto& m : {payoff_p0, payoff_p1}) {
    for (const auto& row : m) {
      if (static_cast<int>(row.size()) != cols || cols == 0) {
        throw std::invalid_argument("matrix game: payoff matrices must share shape");
      }
    }
  }

  MarkovGameSpec game;
  game.num_states = 1;
  game.num_players = 2;
  game.action_counts = {{rows, cols}};
  game.discount = discount;
  game.terminal = {false};
  game.initial_distribution = {1.0};
  const int joints = rows * cols;
  game.transition = {std::vector<std::vector<double>>(joints, {1.0})};
  game.reward.assign(2, {std::vector<double>(joints, 0.0)});
  bool zero_sum = true;
  for (int a0 = 0; a0 < rows; ++a0) {
    for (int a1 = 0; a1 < cols; ++a1) {
      const int j = a0 + rows * a1;
      game.reward[0][0][j] = payoff_p0[a0][a1];
      game.reward[1][0][j] = payoff_p1[a0][a1];
      zero_sum = zero_sum &&
                 std::abs(payoff_p0[a0][a1] + payoff_p1[a0][a1]) <= kKernelTolerance;
    }
  }
  game.zero_sum = zero_sum;
  validate(game);
  return game;
}

MdpSpec make_random_mdp(std::uint64_t seed, int num_states, int num_actions,
                        double discount) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("random mdp: sizes must be >= 1");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw std::invalid_argument("random mdp: discount must lie in (0, 1)");
  }
  Rng rng(seed);
  MdpSpec mdp;
  mdp.num_states = num_states;
  mdp.actions_per_state.assign(num_states, num_actions);
  mdp.discount = discount;
  mdp.reward_bound = 1.0;
  mdp.terminal.assign(num_states, false);
  mdp.transition.assign(num_states, {});
  mdp.reward.assign(num_states, {});
  for (int s = 0; s < num_states; ++s) {
    mdp.transition[s].assign(num_actions, std::vector<double>(num_states, 0.0));
    mdp.reward[s].assign(num_actions, 0.0);
    for (int a = 0; a < num_actions; ++a) {
      // Normalized exponential draws give a Dirichlet(1)-style row.
      double sum = 0.0;
      for (int s2 = 0; s2 < num_states; ++s2) {
        const double e = -std::log1p(-next_double(rng));
        mdp.transition[s][a][s2] = e;
        sum += e;
      }
      if (sum == 0.0) {
        mdp.transition[s][a].assign(num_states, 1.0 / num_states);
      } else {
        for (double& p : mdp.transition[s][a]) p /= sum;
        // Rescale the largest entry so the row sums to exactly 1.
        double total = 0.0;
        for (double p : mdp.transition[s][a]) total += p;
        auto largest = std::max_element(mdp.transition[s][a].begin(),
                                        mdp.transition[s][a].end());
        *largest += 1.0 - total;
      }
      mdp.reward[s][a] = next_double(rng);
    }
  }
  validate(mdp);
  return mdp;
}

MdpSpec induced_mdp(const MarkovGameSpec& game, int player,
                    const std::vector<std::vector<ActionDistribution>>& policies) {
  if (player < 0 || player >= game.num_players) {
    throw std::invalid_argument("induced mdp: player index out of range");
  }
  if (static_cast<int>(policies.size()) != game.num_players) {
    throw std::invalid_argument("induced mdp: need one policy table per player");
  }
  for (int n = 0; n < game.num_players; ++n) {
    if (n == player) continue;
    if (static_cast<int>(policies[n].size()) != game.num_states) {
      throw std::invalid_argument("induced mdp: policy table has wrong length");
    }
    for (int s = 0; s < game.num_states; ++s) {
      if (static_cast<int>(policies[n][s].size()) != game.action_counts[s][n] ||
          !is_distribution(policies[n][s])) {
        throw std::invalid_argument("induced mdp: opponent policy invalid in state " +
                                    std::to_string(s));
      }
    }
  }

  MdpSpec mdp;
  mdp.num_states = game.num_states;
  mdp.discount = game.discount;
  mdp.terminal = game.terminal;
  mdp.actions_per_state.resize(game.num_states);
  mdp.transition.assign(game.num_states, {});
  mdp.reward.assign(game.num_states, {});
  for (int s = 0; s < game.num_states; ++s) {
    const int own = game.action_counts[s][player];
    mdp.actions_per_state[s] = own;
    mdp.transition[s].assign(own, std::vector<double>(game.num_states, 0.0));
    mdp.reward[s].assign(own, 0.0);
    const int joints = game.joint_action_count(s);
    for (int j = 0; j < joints; ++j) {
      const std::vector<int> actions = game.decode_joint(s, j);
      double weight = 1.0;
      for (int n = 0; n < game.num_players; ++n) {
        if (n != player) weight *= policies[n][s][actions[n]];
      }
      if (weight == 0.0) continue;
      const int a = actions[player];
      mdp.reward[s][a] += weight * game.reward[player][s][j];
      for (int s2 = 0; s2 < game.num_states; ++s2) {
        mdp.transition[s][a][s2] += weight * game.transition[s][j][s2];
      }
    }
  }
  // Expected rewards are convex combinations of the player's table entries,
  // so the table bound covers every induced entry.
  double bound = 0.0;
  for (const auto& state_row : game.reward[player]) {
    for (double r : state_row) bound = std::max(bound, std::abs(r));
  }
  mdp.reward_bound = bound;
  int start = 0;
  for (int s = 1; s < game.num_states; ++s) {
    if (game.initial_distribution[s] > game.initial_distribution[start]) start = s;
  }
  mdp.start_state = start;
  validate(mdp);
  return mdp;
}

}  // namespace lonr
