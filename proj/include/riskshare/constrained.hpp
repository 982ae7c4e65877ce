#pragma once

#include "riskshare/distortion.hpp"
#include "riskshare/ladder.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/pareto.hpp"
#include "riskshare/risk_measure.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace riskshare {

/// Budget H_h(f_agent(X)) <= B on one agent's share.
struct ConstraintSpec {
    std::size_t agent = 0;
    Distortion h;
    double B = 0.0;
    std::optional<double> lambda;  // fixes the multiplier instead of searching for it
};

/// Lagrangian solve. A single constraint is solved by bisection on its
/// multiplier; several are updated cyclically (best effort, report flags).
std::pair<Ladder, SolveReport> constrained_pareto_solve(const std::vector<AgentSpec>& agents,
                                                        const std::vector<ConstraintSpec>& constraints,
                                                        const LossModel& X, const SolveOptions& opt = {});

struct BuyerProblem {
    Distortion g;  // buyer
    Distortion h;  // regulator
    double b = 0.0;
    double theta = 0.0;
    double B = 0.0;
};

struct BuyerSolution {
    Ladder ladder;  // agent 0: retained by the buyer, agent 1: insured
    double lambda = 0.0;
    SolveReport report;  // objective = (1 + b) H_g(X - f) + (1 + theta) E f
};

/// Buyer-only minimization with the insured layer constrained by H_h(f(X)) <= B.
BuyerSolution buyer_solve(const BuyerProblem& problem, const LossModel& X, const SolveOptions& opt = {});

struct Classification {
    std::string label;  // C1, C2a, C2b1, C2b2, C3a, C3b, C4a, C4b, C5
    double d = 0.0;     // +inf for C5, NaN when non-unique
    double lambda = 0.0;
    bool non_unique = false;
    std::vector<Ladder> representatives;  // C4: pure deductible, proportional, capped
};

/// Closed-form solution of the buyer problem for X ~ Exp(mu), g = AVaR(alpha),
/// h = AVaR(beta) with alpha > beta > 1.
Classification classify_exponential_avar(double theta, double b, double alpha, double beta, double mu, double B);

struct AvarCrossings {
    std::string regime;  // zero, deductible_a, deductible_b, capped
    double p1 = 0.0;     // lower crossing: p*_1 (deductible_b) or S(d_1) (capped)
    double p2 = 0.0;     // p*_2
    std::vector<double> exact_roots;  // sign changes of Q1 - Q2 located on the piecewise-linear curves
    bool verified = false;            // closed forms agree with exact_roots within 1e-10
};

/// Insurer AVaR(alpha1) with budget AVaR(beta) and multiplier lambda, buyer AVaR(alpha2),
/// premium loading theta and insurer cost b1.
AvarCrossings avar_two_agent_crossings(double alpha1, double alpha2, double beta, double theta, double b1,
                                       double lambda);

}  // namespace riskshare
