#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lonr/env_model.hpp"

namespace lonr {

/// (TQ)(s, a) = r(s, a) + gamma * E_P[max_a' Q(s', a')].
QValues bellman_operator(const QValues& q, const MdpSpec& mdp);
/// Same with the reward table replaced (time-averaged operators for
/// scheduled rewards).
QValues bellman_operator(const QValues& q, const MdpSpec& mdp,
                         const QValues& rewards);

/// ||Q - TQ||inf.
double bellman_residual(const QValues& q, const MdpSpec& mdp);
double bellman_residual(const QValues& q, const MdpSpec& mdp,
                        const QValues& rewards);

double max_abs_difference(const QValues& a, const QValues& b);
double max_abs(const QValues& a);

/// Value iteration to the unique fixed point. For gamma < 1 stops once the
/// step size guarantees ||Q - Q*||inf <= tolerance; for gamma = 1 (episodic)
/// iterates to exact stability. Throws after 10^6 sweeps.
QValues solve_q_star(const MdpSpec& mdp, double tolerance);

struct NosdeEquilibrium {
  double send_probability_p0 = 0.0;  // player 0 mixing in state 0
  double send_probability_p1 = 0.0;  // player 1 mixing in state 1
  double value = 0.0;  // either action's equilibrium Q in the controlled state
};

/// Closed-form stationary equilibrium of the two-state game:
/// p0 = 1 / (2 gamma), p1 = (3 gamma - 1) / (4 gamma), value = 1 / (1 - gamma).
/// Requires gamma in (1/2, 1) so that both probabilities are interior.
NosdeEquilibrium nosde_equilibrium(double discount);

/// Independent check of the closed form: scans each opponent mixing
/// probability on a grid, evaluates exact best responses on the induced MDP,
/// and bisects to the mutual-indifference point.
NosdeEquilibrium nosde_equilibrium_oracle(double discount, double grid_step = 1e-4);

struct SeriesStats {
  double mean = 0.0;
  double amplitude = 0.0;  // max - min over the window
};

/// Mean and amplitude over the final `window` entries.
SeriesStats window_stats(std::span<const double> series, std::int64_t window);

/// Per-state, per-action window statistics of a current-policy trace
/// (policy_trace[t][s][a]). A small final amplitude certifies last-iterate
/// convergence.
std::vector<std::vector<SeriesStats>> last_iterate_report(
    const std::vector<std::vector<ActionDistribution>>& policy_trace,
    std::int64_t window);

/// max_s | pi(s) . Qavg(s, .) - max_a Qavg(s, a) |: the gap whose vanishing
/// certifies that the current policy concentrates on averaged-value
/// maximizers.
double last_iterate_value_gap(const std::vector<ActionDistribution>& policies,
                              const QValues& q_avg);

/// Bootstrap-sampling discrepancy of an asynchronous run. For states s, s2:
/// the average expected value of s2 at s's update times minus the average at
/// s2's own update times up to s's last update. Entries with an empty index
/// set are undefined. Requires an unthinned trace of post-iteration expected
/// values (expected_values[t][s]).
struct XiDiagnostic {
  std::vector<std::vector<double>> xi;
  std::vector<std::vector<bool>> defined;
  double max_abs() const;
};

XiDiagnostic xi_diagnostic(const std::vector<int>& selected_states,
                           const std::vector<std::vector<double>>& expected_values);

/// One executable bound: check passes when lhs <= rhs + tolerance.
struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 1e-9;
  bool passed() const { return lhs <= rhs + tolerance; }
};

}  // namespace lonr
