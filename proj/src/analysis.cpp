#include "lonr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lonr {

namespace {

void check_shape(const QValues& q, const MdpSpec& mdp, const char* what) {
  if (static_cast<int>(q.size()) != mdp.num_states) {
    throw std::invalid_argument(std::string(what) + ": table has wrong number of states");
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    if (static_cast<int>(q[s].size()) != mdp.num_actions(s)) {
      throw std::invalid_argument(std::string(what) + ": table row has wrong length");
    }
  }
}

}  // namespace

QValues bellman_operator(const QValues& q, const MdpSpec& mdp) {
  return bellman_operator(q, mdp, mdp.reward);
}

QValues bellman_operator(const QValues& q, const MdpSpec& mdp,
                         const QValues& rewards) {
  check_shape(q, mdp, "bellman operator");
  check_shape(rewards, mdp, "bellman operator rewards");
  std::vector<double> greedy(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    greedy[s] = *std::max_element(q[s].begin(), q[s].end());
  }
  QValues out(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    out[s].resize(mdp.num_actions(s));
    for (int a = 0; a < mdp.num_actions(s); ++a) {
      double bootstrap = 0.0;
      const auto& row = mdp.transition[s][a];
      for (int s2 = 0; s2 < mdp.num_states; ++s2) {
        if (row[s2] > 0.0) bootstrap += row[s2] * greedy[s2];
      }
      out[s][a] = rewards[s][a] + mdp.discount * bootstrap;
    }
  }
  return out;
}

double max_abs_difference(const QValues& a, const QValues& b) {
  double out = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t i = 0; i < a[s].size(); ++i) {
      out = std::max(out, std::abs(a[s][i] - b[s][i]));
    }
  }
  return out;
}

double max_abs(const QValues& a) {
  double out = 0.0;
  for (const auto& row : a) {
    for (double v : row) out = std::max(out, std::abs(v));
  }
  return out;
}

double bellman_residual(const QValues& q, const MdpSpec& mdp) {
  return max_abs_difference(q, bellman_operator(q, mdp));
}

double bellman_residual(const QValues& q, const MdpSpec& mdp,
                        const QValues& rewards) {
  return max_abs_difference(q, bellman_operator(q, mdp, rewards));
}

QValues solve_q_star(const MdpSpec& mdp, double tolerance) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("solve_q_star: tolerance must be positive");
  }
  const double gamma = mdp.discount;
  // ||Q_{i+1} - Q_i|| <= threshold implies ||Q_{i+1} - Q*|| <= tolerance.
  const double threshold =
      gamma > 0.0 && gamma < 1.0 ? tolerance * (1.0 - gamma) / gamma : 0.0;
  QValues q(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) q[s].assign(mdp.num_actions(s), 0.0);
  constexpr std::int64_t kMaxSweeps = 1'000'000;
  for (std::int64_t i = 0; i < kMaxSweeps; ++i) {
    QValues next = bellman_operator(q, mdp);
    const double delta = max_abs_difference(next, q);
    q = std::move(next);
    if (delta <= threshold) return q;
  }
  throw std::runtime_error("solve_q_star: iteration cap exceeded");
}

NosdeEquilibrium nosde_equilibrium(double discount) {
  if (!(discount > 0.5 && discount < 1.0)) {
    throw std::invalid_argument(
        "nosde equilibrium: randomized equilibrium needs discount in (1/2, 1)");
  }
  NosdeEquilibrium eq;
  eq.send_probability_p0 = 1.0 / (2.0 * discount);
  eq.send_probability_p1 = (3.0 * discount - 1.0) / (4.0 * discount);
  eq.value = 1.0 / (1.0 - discount);
  return eq;
}

namespace {

// Gap between the controller's optimal KEEP and SEND values when the
// opponent mixes with the given send probability. A zero of this function in
// the opponent's probability is the mutual-indifference point.
double indifference_gap(const MarkovGameSpec& game, int player,
                        double opponent_send) {
  const int opponent = 1 - player;
  std::vector<std::vector<ActionDistribution>> policies(2);
  policies[player] = {{1.0}, {1.0}};
  policies[opponent] = {{1.0}, {1.0}};
  policies[player][player == 0 ? 0 : 1] = {0.5, 0.5};  // ignored by induction
  policies[opponent][opponent == 0 ? 0 : 1] = {1.0 - opponent_send, opponent_send};
  const MdpSpec faced = induced_mdp(game, player, policies);
  const QValues q_star = solve_q_star(faced, 1e-12);
  const int controlled = player == 0 ? 0 : 1;
  return q_star[controlled][kKeep] - q_star[controlled][kSend];
}

double locate_indifference(const MarkovGameSpec& game, int player,
                           double grid_step) {
  double lo = grid_step;
  double lo_gap = indifference_gap(game, player, lo);
  double hi = lo;
  double hi_gap = lo_gap;
  bool bracketed = false;
  for (double p = 2.0 * grid_step; p < 1.0; p += grid_step) {
    hi = p;
    hi_gap = indifference_gap(game, player, p);
    if ((lo_gap <= 0.0) != (hi_gap <= 0.0)) {
      bracketed = true;
      break;
    }
    lo = hi;
    lo_gap = hi_gap;
  }
  if (!bracketed) {
    throw std::runtime_error("nosde oracle: no sign change on the grid");
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double mid_gap = indifference_gap(game, player, mid);
    if ((mid_gap <= 0.0) == (lo_gap <= 0.0)) {
      lo = mid;
      lo_gap = mid_gap;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

NosdeEquilibrium nosde_equilibrium_oracle(double discount, double grid_step) {
  const MarkovGameSpec game = make_nosde(discount);
  NosdeEquilibrium eq;
  // Player 0's indifference pins the opponent's mixing and vice versa.
  eq.send_probability_p1 = locate_indifference(game, 0, grid_step);
  eq.send_probability_p0 = locate_indifference(game, 1, grid_step);

  std::vector<std::vector<ActionDistribution>> policies(2);
  policies[0] = {{1.0 - eq.send_probability_p0, eq.send_probability_p0}, {1.0}};
  policies[1] = {{1.0}, {1.0 - eq.send_probability_p1, eq.send_probability_p1}};
  const MdpSpec faced = induced_mdp(game, 0, policies);
  const QValues q_star = solve_q_star(faced, 1e-12);
  eq.value = q_star[0][kKeep];
  return eq;
}

SeriesStats window_stats(std::span<const double> series, std::int64_t window) {
  if (window < 1 || window > static_cast<std::int64_t>(series.size())) {
    throw std::invalid_argument("window_stats: window larger than series");
  }
  SeriesStats stats;
  double lo = series[series.size() - window];
  double hi = lo;
  double sum = 0.0;
  for (std::size_t i = series.size() - window; i < series.size(); ++i) {
    sum += series[i];
    lo = std::min(lo, series[i]);
    hi = std::max(hi, series[i]);
  }
  stats.mean = sum / static_cast<double>(window);
  stats.amplitude = hi - lo;
  return stats;
}

std::vector<std::vector<SeriesStats>> last_iterate_report(
    const std::vector<std::vector<ActionDistribution>>& policy_trace,
    std::int64_t window) {
  if (policy_trace.empty() ||
      window > static_cast<std::int64_t>(policy_trace.size())) {
    throw std::invalid_argument("last_iterate_report: window larger than trace");
  }
  const std::size_t num_states = policy_trace[0].size();
  std::vector<std::vector<SeriesStats>> report(num_states);
  std::vector<double> series(policy_trace.size());
  for (std::size_t s = 0; s < num_states; ++s) {
    report[s].resize(policy_trace[0][s].size());
    for (std::size_t a = 0; a < policy_trace[0][s].size(); ++a) {
      for (std::size_t t = 0; t < policy_trace.size(); ++t) {
        series[t] = policy_trace[t][s][a];
      }
      report[s][a] = window_stats(series, window);
    }
  }
  return report;
}

double last_iterate_value_gap(const std::vector<ActionDistribution>& policies,
                              const QValues& q_avg) {
  if (policies.size() != q_avg.size()) {
    throw std::invalid_argument("last_iterate_value_gap: dimension mismatch");
  }
  double gap = 0.0;
  for (std::size_t s = 0; s < policies.size(); ++s) {
    if (policies[s].size() != q_avg[s].size()) {
      throw std::invalid_argument("last_iterate_value_gap: dimension mismatch");
    }
    double expected = 0.0;
    for (std::size_t a = 0; a < policies[s].size(); ++a) {
      expected += policies[s][a] * q_avg[s][a];
    }
    const double best = *std::max_element(q_avg[s].begin(), q_avg[s].end());
    gap = std::max(gap, std::abs(expected - best));
  }
  return gap;
}

double XiDiagnostic::max_abs() const {
  double out = 0.0;
  for (std::size_t s = 0; s < xi.size(); ++s) {
    for (std::size_t s2 = 0; s2 < xi[s].size(); ++s2) {
      if (defined[s][s2]) out = std::max(out, std::abs(xi[s][s2]));
    }
  }
  return out;
}

XiDiagnostic xi_diagnostic(const std::vector<int>& selected_states,
                           const std::vector<std::vector<double>>& expected_values) {
  if (selected_states.size() != expected_values.size()) {
    throw std::invalid_argument("xi diagnostic: trace lengths disagree");
  }
  const std::int64_t horizon = static_cast<std::int64_t>(selected_states.size());
  int num_states = 0;
  for (const auto& row : expected_values) {
    num_states = static_cast<int>(row.size());
    break;
  }
  std::vector<std::vector<std::int64_t>> updates(num_states);
  for (std::int64_t t = 0; t < horizon; ++t) {
    const int s = selected_states[t];
    if (s < 0 || s >= num_states) {
      throw std::invalid_argument("xi diagnostic: selected state out of range");
    }
    updates[s].push_back(t);
  }

  XiDiagnostic diag;
  diag.xi.assign(num_states, std::vector<double>(num_states, 0.0));
  diag.defined.assign(num_states, std::vector<bool>(num_states, false));
  for (int s = 0; s < num_states; ++s) {
    if (updates[s].empty()) continue;
    const std::int64_t last = updates[s].back();
    for (int s2 = 0; s2 < num_states; ++s2) {
      double sampled = 0.0;
      for (std::int64_t t : updates[s]) sampled += expected_values[t][s2];
      sampled /= static_cast<double>(updates[s].size());

      double own = 0.0;
      std::int64_t own_count = 0;
      for (std::int64_t t : updates[s2]) {
        if (t > last) break;
        own += expected_values[t][s2];
        ++own_count;
      }
      if (own_count == 0) continue;
      diag.xi[s][s2] = sampled - own / static_cast<double>(own_count);
      diag.defined[s][s2] = true;
    }
  }
  return diag;
}

}  // namespace lonr
