#include "lonr/env_model.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <doctest.h>

#include "lonr/rng.hpp"
#include "lonr/serialization.hpp"

namespace lonr {
namespace {

// Independent oracle for deterministic episodic grids: cheapest cost to any
// terminal with edge cost = -reward, so the optimal return is its negation.
double optimal_return_oracle(const MdpSpec& mdp) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(mdp.num_states, inf);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  cost[mdp.start_state] = 0.0;
  queue.push({0.0, mdp.start_state});
  double best = inf;
  while (!queue.empty()) {
    const auto [c, s] = queue.top();
    queue.pop();
    if (c > cost[s]) continue;
    if (mdp.terminal[s]) {
      best = std::min(best, c);
      continue;
    }
    for (int a = 0; a < mdp.num_actions(s); ++a) {
      int next = -1;
      for (int s2 = 0; s2 < mdp.num_states; ++s2) {
        if (mdp.transition[s][a][s2] == 1.0) next = s2;
      }
      REQUIRE(next >= 0);  // deterministic moves only
      const double edge = -mdp.reward[s][a];
      if (c + edge < cost[next]) {
        cost[next] = c + edge;
        queue.push({cost[next], next});
      }
    }
  }
  return -best;
}

TEST_CASE("nosde rewards and transitions match the reference tables") {
  const MarkovGameSpec game = make_nosde(0.75);
  CHECK(game.num_states == 2);
  CHECK(game.num_players == 2);
  CHECK(game.controller == std::vector<int>{0, 1});

  // Player 0 rewards: keep pays 1 in state 0 and 3 in state 1, send pays 0.
  CHECK(game.reward[0][0][kKeep] == 1.0);
  CHECK(game.reward[0][0][kSend] == 0.0);
  CHECK(game.reward[0][1][kKeep] == 3.0);
  CHECK(game.reward[0][1][kSend] == 0.0);
  // Player 1 rewards: paid 3 when sent to, 1 for keeping in state 1.
  CHECK(game.reward[1][0][kKeep] == 0.0);
  CHECK(game.reward[1][0][kSend] == 3.0);
  CHECK(game.reward[1][1][kKeep] == 1.0);
  CHECK(game.reward[1][1][kSend] == 0.0);

  // Deterministic moves: keep self-loops, send crosses over.
  CHECK(game.transition[0][kKeep] == std::vector<double>{1.0, 0.0});
  CHECK(game.transition[0][kSend] == std::vector<double>{0.0, 1.0});
  CHECK(game.transition[1][kKeep] == std::vector<double>{0.0, 1.0});
  CHECK(game.transition[1][kSend] == std::vector<double>{1.0, 0.0});
}

TEST_CASE("nosde rejects boundary discounts") {
  CHECK_THROWS_AS(make_nosde(1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_nosde(0.0), std::invalid_argument);
}

TEST_CASE("nosde serialization matches the golden document") {
  const MarkovGameSpec game = make_nosde(0.75);
  std::ifstream in(std::string(TEST_DATA_DIR) + "/nosde.json");
  REQUIRE(in.good());
  std::stringstream golden;
  golden << in.rdbuf();
  CHECK(game_to_json(game).dump(2) + "\n" == golden.str());

  const MarkovGameSpec round_trip = game_from_json(game_to_json(game));
  CHECK(round_trip.reward == game.reward);
  CHECK(round_trip.transition == game.transition);
  CHECK(round_trip.controller == game.controller);
}

TEST_CASE("cliff grid geometry and optimal return") {
  const MdpSpec grid = make_cliff_grid(4, 12);
  CHECK(grid.num_states == 48);
  CHECK(grid.discount == 1.0);
  CHECK(grid.start_state == 0);
  CHECK(grid.terminal[11]);  // goal, bottom-right
  for (int col = 1; col <= 10; ++col) CHECK(grid.terminal[col]);
  CHECK_FALSE(grid.terminal[0]);
  CHECK_FALSE(grid.terminal[12]);

  // Stepping from the start into the adjacent cliff cell pays -100 and the
  // episode ends there.
  CHECK(grid.reward[0][kEast] == -100.0);
  CHECK(grid.transition[0][kEast][1] == 1.0);
  CHECK(grid.transition[1][kNorth][1] == 1.0);  // cliff absorbs
  CHECK(grid.reward[1][kNorth] == 0.0);

  // Off-edge moves keep the position and still cost one.
  CHECK(grid.transition[0][kSouth][0] == 1.0);
  CHECK(grid.reward[0][kSouth] == -1.0);

  CHECK(optimal_return_oracle(grid) == -13.0);  // up, 11 east, down
}

TEST_CASE("cliff grid smallest instance") {
  // Needs room for start, goal and at least one cliff cell.
  CHECK_THROWS_AS(make_cliff_grid(2, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_cliff_grid(1, 12), std::invalid_argument);
  const MdpSpec smallest = make_cliff_grid(2, 3);
  CHECK(optimal_return_oracle(smallest) == -4.0);  // frozen from the oracle
}

TEST_CASE("soccer is zero-sum with row-stochastic kernels") {
  const MarkovGameSpec game = make_soccer();
  CHECK(game.num_states == 25);
  CHECK(game.zero_sum);
  CHECK(game.discount == 0.9);
  for (int s = 0; s < game.num_states; ++s) {
    for (int j = 0; j < game.joint_action_count(s); ++j) {
      CHECK(game.reward[0][s][j] + game.reward[1][s][j] == 0.0);
      double sum = 0.0;
      for (double p : game.transition[s][j]) sum += p;
      CHECK(std::abs(sum - 1.0) <= kKernelTolerance);
    }
  }
}

TEST_CASE("soccer scoring is order independent when the opponent sticks") {
  const MarkovGameSpec game = make_soccer();
  // Player 0 on the left middle column with the ball, moving west into the
  // goal zone; player 1 sticks. Both resolution orders score.
  const int s = soccer_state_index(/*pos_a=*/0, /*pos_b=*/3, /*ball_owner=*/0);
  const int j = game.joint_index(s, {kWest, kStick});
  CHECK(game.reward[0][s][j] == 100.0);
  CHECK(game.reward[1][s][j] == -100.0);
  CHECK(game.transition[s][j][kSoccerTerminal] == 1.0);

  // Ball owner entering the far goal column also scores.
  const int s_east = soccer_state_index(1, 2, 0);
  const int j_east = game.joint_index(s_east, {kEast, kStick});
  CHECK(game.reward[0][s_east][j_east] == 100.0);
}

TEST_CASE("soccer stick-stick is the identity") {
  const MarkovGameSpec game = make_soccer();
  for (int pos_a = 0; pos_a < 4; ++pos_a) {
    for (int pos_b = 0; pos_b < 4; ++pos_b) {
      if (pos_a == pos_b) continue;
      const int s = soccer_state_index(pos_a, pos_b, 0);
      const int j = game.joint_index(s, {kStick, kStick});
      CHECK(game.transition[s][j][s] == 1.0);
      CHECK(game.reward[0][s][j] == 0.0);
    }
  }
}

TEST_CASE("soccer collision bounces the mover and transfers the ball") {
  const MarkovGameSpec game = make_soccer();
  // Cells 0 and 1 share a row; player 0 owns the ball and moves east into
  // player 1, who sticks: position unchanged, ball now with player 1.
  const int s = soccer_state_index(0, 1, 0);
  const int j = game.joint_index(s, {kEast, kStick});
  const int expected = soccer_state_index(0, 1, 1);
  CHECK(game.transition[s][j][expected] == 1.0);
  CHECK(game.reward[0][s][j] == 0.0);
}

TEST_CASE("soccer swap symmetry is an involution matching role swap") {
  const MarkovGameSpec game = make_soccer();
  REQUIRE(static_cast<int>(game.swap_symmetry.size()) == game.num_states);
  for (int s = 0; s < game.num_states; ++s) {
    CHECK(game.swap_symmetry[game.swap_symmetry[s]] == s);
  }
  CHECK(game.swap_symmetry[soccer_state_index(0, 1, 0)] ==
        soccer_state_index(1, 0, 1));
}

TEST_CASE("matrix game construction") {
  const std::vector<std::vector<double>> rps = {{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}};
  std::vector<std::vector<double>> rps_neg = rps;
  for (auto& row : rps_neg) {
    for (double& v : row) v = -v;
  }
  const MarkovGameSpec game = make_matrix_game(rps, rps_neg);
  CHECK(game.num_states == 1);
  CHECK(game.zero_sum);
  CHECK(game.discount == 0.0);
  CHECK(game.joint_action_count(0) == 9);
  CHECK(game.reward[0][0][game.joint_index(0, {0, 1})] == -1.0);  // rock vs paper

  const std::vector<std::vector<double>> pennies = {{1, -1}, {-1, 1}};
  std::vector<std::vector<double>> pennies_neg = pennies;
  for (auto& row : pennies_neg) {
    for (double& v : row) v = -v;
  }
  CHECK(make_matrix_game(pennies, pennies_neg).zero_sum);

  CHECK_THROWS_AS(make_matrix_game(rps, pennies), std::invalid_argument);

  // All-zero payoffs: every joint policy is worth exactly zero.
  const std::vector<std::vector<double>> zero(2, std::vector<double>(2, 0.0));
  const MarkovGameSpec zero_game = make_matrix_game(zero, zero);
  for (double r : zero_game.reward[0][0]) CHECK(r == 0.0);
}

TEST_CASE("random mdp is deterministic in the seed and row-stochastic") {
  const MdpSpec a = make_random_mdp(7, 5, 3, 0.9);
  const MdpSpec b = make_random_mdp(7, 5, 3, 0.9);
  CHECK(a.transition == b.transition);
  CHECK(a.reward == b.reward);
  CHECK(make_random_mdp(8, 5, 3, 0.9).reward != a.reward);

  for (int s = 0; s < a.num_states; ++s) {
    for (int act = 0; act < 3; ++act) {
      double sum = 0.0;
      for (double p : a.transition[s][act]) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) <= kKernelTolerance);
      CHECK(a.reward[s][act] >= 0.0);
      CHECK(a.reward[s][act] <= 1.0);
    }
  }
  CHECK_THROWS_AS(make_random_mdp(1, 0, 2, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(make_random_mdp(1, 2, 2, 1.0), std::invalid_argument);
}

TEST_CASE("single self-loop mdp has the geometric-series fixed point") {
  const MdpSpec tiny = make_random_mdp(5, 1, 1, 0.9);
  CHECK(tiny.transition[0][0][0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mdp validation rejects broken invariants") {
  MdpSpec mdp = make_random_mdp(3, 3, 2, 0.9);
  SUBCASE("non-stochastic row") {
    mdp.transition[0][0][0] += 0.1;
    CHECK_THROWS_AS(validate(mdp), std::invalid_argument);
  }
  SUBCASE("reward above the declared bound") {
    mdp.reward[1][1] = 2.0;
    CHECK_THROWS_AS(validate(mdp), std::invalid_argument);
  }
  SUBCASE("terminal must absorb with zero reward") {
    mdp.terminal[0] = true;
    CHECK_THROWS_AS(validate(mdp), std::invalid_argument);
  }
  SUBCASE("discount one needs terminal reachability") {
    mdp.discount = 1.0;
    CHECK_THROWS_AS(validate(mdp), std::invalid_argument);
  }
}

TEST_CASE("reward schedule overrides the table and honors the bound") {
  MdpSpec mdp = make_random_mdp(11, 2, 2, 0.5);
  mdp.reward_schedule = [](std::int64_t t, int, int a) {
    return (t + a) % 2 == 0 ? 1.0 : 0.0;
  };
  CHECK(mdp.reward_at(0, 0, 0) == 1.0);
  CHECK(mdp.reward_at(1, 0, 0) == 0.0);
  mdp.reward_schedule = [](std::int64_t, int, int) { return 5.0; };
  CHECK_THROWS_AS(mdp.reward_at(0, 0, 0), std::invalid_argument);
}

TEST_CASE("induced mdp folds the opponent policy into expectations") {
  const MarkovGameSpec nosde = make_nosde(0.75);
  // Opponent keeps deterministically in state 1: from player 0's view that
  // state self-loops and pays 3.
  std::vector<std::vector<ActionDistribution>> policies(2);
  policies[0] = {{0.5, 0.5}, {1.0}};
  policies[1] = {{1.0}, {1.0, 0.0}};
  const MdpSpec faced = induced_mdp(nosde, 0, policies);
  CHECK(faced.reward[1][0] == 3.0);
  CHECK(faced.transition[1][0][1] == 1.0);
  CHECK(faced.actions_per_state == std::vector<int>{2, 1});
  CHECK(faced.discount == 0.75);

  // Uniform opponent mixing actions worth 0 and 3 yields 1.5.
  policies[1][1] = {0.5, 0.5};
  CHECK(induced_mdp(nosde, 0, policies).reward[1][0] == doctest::Approx(1.5));

  policies[1][1] = {0.5, 0.6};
  CHECK_THROWS_AS(induced_mdp(nosde, 0, policies), std::invalid_argument);
  policies[1][1] = {1.0};
  CHECK_THROWS_AS(induced_mdp(nosde, 0, policies), std::invalid_argument);
}

TEST_CASE("induced reward of a matrix game is the payoff matrix-vector product") {
  const std::vector<std::vector<double>> payoff = {{2, -1, 0.5}, {0, 1, -2}};
  std::vector<std::vector<double>> negated = payoff;
  for (auto& row : negated) {
    for (double& v : row) v = -v;
  }
  const MarkovGameSpec game = make_matrix_game(payoff, negated);
  const ActionDistribution opponent = {0.2, 0.3, 0.5};
  std::vector<std::vector<ActionDistribution>> policies(2);
  policies[0] = {{0.5, 0.5}};
  policies[1] = {opponent};
  const MdpSpec faced = induced_mdp(game, 0, policies);
  for (int a = 0; a < 2; ++a) {
    double expected = 0.0;  // dense product oracle
    for (int b = 0; b < 3; ++b) expected += payoff[a][b] * opponent[b];
    CHECK(faced.reward[0][a] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("induced mdp is linear in the opponent policy") {
  Rng rng(99);
  const MarkovGameSpec soccer = make_soccer();
  const auto random_policy = [&](const MarkovGameSpec& game, int player) {
    std::vector<ActionDistribution> table(game.num_states);
    for (int s = 0; s < game.num_states; ++s) {
      table[s].resize(game.action_counts[s][player]);
      double sum = 0.0;
      for (double& p : table[s]) {
        p = 0.05 + next_double(rng);
        sum += p;
      }
      for (double& p : table[s]) p /= sum;
      double total = 0.0;
      for (double p : table[s]) total += p;
      table[s].back() += 1.0 - total;
    }
    return table;
  };

  const auto own = random_policy(soccer, 0);
  const auto p = random_policy(soccer, 1);
  const auto q = random_policy(soccer, 1);
  const double lambda = 0.3;
  std::vector<ActionDistribution> mix(soccer.num_states);
  for (int s = 0; s < soccer.num_states; ++s) {
    mix[s].resize(p[s].size());
    for (std::size_t a = 0; a < p[s].size(); ++a) {
      mix[s][a] = lambda * p[s][a] + (1.0 - lambda) * q[s][a];
    }
  }

  const MdpSpec faced_p = induced_mdp(soccer, 0, {own, p});
  const MdpSpec faced_q = induced_mdp(soccer, 0, {own, q});
  const MdpSpec faced_mix = induced_mdp(soccer, 0, {own, mix});
  for (int s = 0; s < soccer.num_states; ++s) {
    for (int a = 0; a < faced_mix.num_actions(s); ++a) {
      CHECK(faced_mix.reward[s][a] ==
            doctest::Approx(lambda * faced_p.reward[s][a] +
                            (1.0 - lambda) * faced_q.reward[s][a])
                .epsilon(1e-12));
      for (int s2 = 0; s2 < soccer.num_states; ++s2) {
        CHECK(faced_mix.transition[s][a][s2] ==
              doctest::Approx(lambda * faced_p.transition[s][a][s2] +
                              (1.0 - lambda) * faced_q.transition[s][a][s2])
                  .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("mdp json round trip") {
  const MdpSpec mdp = make_cliff_grid(3, 4);
  const MdpSpec round_trip = mdp_from_json(mdp_to_json(mdp));
  CHECK(round_trip.transition == mdp.transition);
  CHECK(round_trip.reward == mdp.reward);
  CHECK(round_trip.discount == mdp.discount);
  CHECK(round_trip.start_state == mdp.start_state);
}

}  // namespace
}  // namespace lonr
