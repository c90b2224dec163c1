#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lonr/analysis.hpp"
#include "lonr/env_model.hpp"
#include "lonr/lonr.hpp"
#include "lonr/minimizers.hpp"

namespace lonr {

/// Shortest decimal representation that round-trips the exact value.
std::string format_double(double value);

nlohmann::json mdp_to_json(const MdpSpec& mdp);
MdpSpec mdp_from_json(const nlohmann::json& doc);
nlohmann::json game_to_json(const MarkovGameSpec& game);
MarkovGameSpec game_from_json(const nlohmann::json& doc);

/// Tracker snapshot for trace inspection:
/// {kind, t, trackers[], policy[], policy_sum[], weight}.
nlohmann::json minimizer_snapshot(const Minimizer& minimizer);

nlohmann::json bound_check_to_json(const BoundCheck& check);

/// Writes the per-iteration trace of one run (one result per player) in the
/// fixed column order:
/// iteration,player,state,action,q,q_avg,pi,pi_avg,residual,regret,selected
void write_trace_csv(std::ostream& os, const std::vector<RunResult>& players);

}  // namespace lonr
