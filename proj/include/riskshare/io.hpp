#pragma once

#include "riskshare/constrained.hpp"
#include "riskshare/distortion.hpp"
#include "riskshare/ladder.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/monotone_map.hpp"
#include "riskshare/pareto.hpp"
#include "riskshare/risk_measure.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace riskshare::io {

using Json = nlohmann::ordered_json;

Distortion distortion_from_json(const Json& j);
Json to_json(const Distortion& g);

LossModel loss_from_json(const Json& j);
Json to_json(const LossModel& X);

Ladder ladder_from_json(const Json& j);
Json to_json(const Ladder& L);
/// Columns t_lo, t_hi, w_1..w_n.
std::string ladder_csv(const Ladder& L);

AgentSpec agent_from_json(const Json& j);
Json to_json(const AgentSpec& a);

/// Either "zero", "identity" or {knots, values, slope_left, slope_right}.
PiecewiseLinearMap map_from_json(const Json& j);

TieRule tie_rule_from_string(const std::string& s);
std::string to_string(TieRule t);

struct ProblemConfig {
    std::optional<LossModel> loss;
    std::vector<AgentSpec> agents;
    std::vector<ConstraintSpec> constraints;
    SolveOptions options;
    std::optional<Allocation> original;
    std::optional<BuyerProblem> buyer;
    std::optional<double> delta;  // two degenerate agents: delta-family member
};

/// Throws ConfigError on schema violations.
ProblemConfig config_from_json(const Json& j);
ProblemConfig load_config(const std::string& path);

Json to_json(const SolveReport& r);
Json to_json(const Classification& c);

/// Serializes with 17 significant digits; +-inf become "inf"/"-inf", NaN becomes null.
std::string dump(const Json& j, int indent = 2);

}  // namespace riskshare::io
