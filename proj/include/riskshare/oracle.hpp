#pragma once

#include "riskshare/distortion.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/risk_measure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace riskshare {

/// Choquet integral of a finite random variable: values sorted from the top,
/// H = sum_k v_(k) [g(P_k) - g(P_{k-1})] with P_k the mass of the k largest.
double choquet_discrete(const Distortion& g, const std::vector<double>& values, const std::vector<double>& probs);

struct DiscreteInstance {
    LossModel X;  // must be Discrete
    std::vector<AgentSpec> agents;
    std::size_t max_atoms = 8;
    std::size_t max_agents = 4;
};

struct BruteForceResult {
    double objective = 0.0;
    std::vector<std::size_t> assignment;  // owner of each increment x_j - x_{j-1}, j = 1..m-1
    std::vector<std::vector<double>> payouts;  // [agent][atom]
};

/// Exhaustive search over whole-increment assignments minimizing sum_i V_i / |s_i|.
/// The base amount x_0 goes to agent 0.
BruteForceResult brute_force_discrete(const DiscreteInstance& inst);

struct ConvexOrderResult {
    bool y_le_z = false;
    bool z_le_y = false;
    std::string verdict;  // ordered, reversed, incomparable
};

/// Y <=_cx Z: equal means and dominated upper-quantile integrals.
ConvexOrderResult convex_order_check(const LossModel& Y, const LossModel& Z);

struct DominanceReport {
    bool already_comonotone = false;
    bool comonotone = false;  // rearranged allocation passes comonotone_check
    bool dominates = false;   // no V_i or H_{h_i} increased beyond 1e-10
    std::vector<std::vector<double>> rearranged;  // [agent][state]
    std::vector<double> v_original, v_rearranged;
    std::vector<double> h_original, h_rearranged;  // NaN for agents without a constraint
};

/// Replaces the allocation by a comonotone one, each share a non-decreasing
/// function of X and no riskier than the original in convex order.
DominanceReport comonotone_dominance_check(const std::vector<double>& x, const std::vector<double>& probs,
                                           const std::vector<std::vector<double>>& payouts,
                                           const std::vector<AgentSpec>& agents,
                                           const std::vector<std::optional<Distortion>>& constraints = {});

}  // namespace riskshare
