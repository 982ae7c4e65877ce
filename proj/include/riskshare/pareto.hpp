#pragma once

#include "riskshare/ladder.hpp"
#include "riskshare/load_curve.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/risk_measure.hpp"

#include <string>
#include <utility>
#include <vector>

namespace riskshare {

enum class Existence { Solvable, DegenerateAllZero, Unsolvable };

/// Classifies the signs of s_i = 1 + b_i + c_i (|s_i| <= 1e-12 counts as zero).
Existence existence_check(const std::vector<AgentSpec>& agents);

enum class TieRule { Lowest, Highest, Split };

struct SolveOptions {
    std::size_t grid_size = 2048;
    TieRule tie = TieRule::Lowest;
    double tol_lambda = 1e-10;
    double tol_residual = 1e-8;
};

struct Segment {
    double lo = 0.0;
    double hi = 0.0;
};

struct AgentOutcome {
    double value = 0.0;      // V_i(f_i(X))
    double distorted = 0.0;  // H_{g_i}(f_i(X))
    double mean = 0.0;       // E f_i(X)
};

struct SolveReport {
    std::vector<AgentOutcome> agents;
    double objective = 0.0;  // sum_i V_i / |s_i|
    double envelope = 0.0;   // integral of min_k Q_k(S_X(t)) over t >= 0, computed independently
    std::vector<Segment> ties;
    std::vector<double> lambdas;
    std::vector<double> constraint_values;  // H_{h_i}(f_i(X)) per constraint
    bool converged = true;
    bool best_effort = false;
    bool tie_mixture = false;
    std::string case_label;
};

struct LadderBuild {
    Ladder ladder;
    std::vector<Segment> ties;
};

/// Probabilities in (0, 1) where the pointwise argmin of the curves may change.
std::vector<double> critical_probabilities(const std::vector<LoadCurve>& curves, std::size_t grid_size);

/// Ladder giving each loss level t to argmin_k Q_k(S_X(t)). Requires X >= 0.
LadderBuild build_ladder(const std::vector<LoadCurve>& curves, const LossModel& X, const SolveOptions& opt);

/// Integral of min_k Q_k(S_X(t)) over t >= 0, by direct quadrature in t.
double envelope_integral(const std::vector<LoadCurve>& curves, const LossModel& X, const SolveOptions& opt);

std::pair<Ladder, SolveReport> pareto_solve(const std::vector<AgentSpec>& agents, const LossModel& X,
                                            const SolveOptions& opt = {});

/// Per-agent outcomes and the weighted objective of an arbitrary ladder.
SolveReport evaluate_ladder(const std::vector<AgentSpec>& agents, const Ladder& ladder, const LossModel& X);

/// Pareto frontier in value space: sum_i x_i / s_i = constant.
struct Hyperplane {
    std::vector<double> coefficients;
    double constant = 0.0;

    [[nodiscard]] double residual(const std::vector<double>& values) const;
    [[nodiscard]] bool contains(const std::vector<double>& values, double tol = 1e-9) const;
};

Hyperplane hyperplane(const std::vector<AgentSpec>& agents, const SolveReport& report);

/// Two agents with 1 + b_i + c_i = 0. Agent 1 takes the tranches where
/// g1(p) - p < delta (g2(p) - p). The b_i only rescale delta by (1+b2)/(1+b1)
/// and are validated but otherwise unused.
Ladder delta_family_solve(const Distortion& g1, const Distortion& g2, double b1, double b2, double delta,
                          const LossModel& X, TieRule tie = TieRule::Lowest);

struct DeductibleResult {
    enum class Kind { Full, Deductible, Zero };
    Kind kind = Kind::Zero;
    double d = 0.0;       // +inf for zero coverage
    double p_star = 0.0;  // S_X(d)
};

/// Insurer (g1, b1) against buyer g2 with premium loading theta: the optimal
/// cover is (X - d)_+ when (g1 - p)/(g2 - p) is non-decreasing.
DeductibleResult deductible_two_agent(const Distortion& g1, const Distortion& g2, double theta, double b1,
                                      const LossModel& X);

}  // namespace riskshare
