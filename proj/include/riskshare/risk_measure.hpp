#pragma once

#include "riskshare/distortion.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/monotone_map.hpp"

#include <vector>

namespace riskshare {

/// Agent i evaluates a payout Y by V(Y) = (1 + b) H_g(Y) + c E[Y]; the fixed
/// cost `a` is carried only for rationality reporting.
class AgentSpec {
public:
    AgentSpec(Distortion g, double a, double b, double c);

    [[nodiscard]] const Distortion& g() const { return g_; }
    [[nodiscard]] double a() const { return a_; }
    [[nodiscard]] double b() const { return b_; }
    [[nodiscard]] double c() const { return c_; }
    /// 1 + b + c
    [[nodiscard]] double s() const { return s_; }

private:
    Distortion g_;
    double a_;
    double b_;
    double c_;
    double s_;
};

/// Payout maps of the total loss, one per agent.
using Allocation = std::vector<PiecewiseLinearMap>;

/// Integral of g(S_X(t)) over [lo, hi]; hi may be +inf.
double layer_integral(const Distortion& g, const LossModel& X, double lo, double hi);

/// H_g(X). Exact jump sum for discrete models, closed forms or adaptive
/// quadrature for the others.
double distorted_expectation(const Distortion& g, const LossModel& X);

/// H_g(f(X)) for a non-decreasing map f, via S^{-1}_{f(X)} = f(S^{-1}_X).
double distorted_expectation(const Distortion& g, const PiecewiseLinearMap& f, const LossModel& X);

/// E[f(X)].
double expectation(const PiecewiseLinearMap& f, const LossModel& X);

/// V(f(X)) = (1 + b) H_g(f(X)) + c E f(X).
double value_functional(const AgentSpec& agent, const PiecewiseLinearMap& f, const LossModel& X);

/// Integral over t >= 0 of [(1 + b) g + c](S_X(t)) df(t). Requires X >= 0 and f(0) = 0.
double tranche_integral(const Distortion& g, double b, double c, const PiecewiseLinearMap& f,
                        const LossModel& X);

struct RationalityEntry {
    double h_original = 0.0;  // H_{g_i}(X_i)
    double v_proposed = 0.0;  // V_i(Y_i)
    double margin = 0.0;      // H_{g_i}(X_i) - a_i - V_i(Y_i)
    bool rational = false;
};

/// Participation check H_{g_i}(X_i) >= a_i + V_i(Y_i) for every agent.
std::vector<RationalityEntry> rationality_check(const std::vector<AgentSpec>& agents,
                                                const Allocation& original,
                                                const Allocation& proposed, const LossModel& X);

struct InsuranceRationality {
    double premium = 0.0;         // (1 + theta) E f(X)
    double insurer_cost = 0.0;    // (1 + b1) H_{g1}(f(X))
    double buyer_benefit = 0.0;   // H_{g2}(f(X))
    bool insurer_ok = false;
    bool buyer_ok = false;
};

/// Two-agent insurance specialization: insurer accepts when the premium covers
/// its risk-adjusted cost, buyer when the risk-adjusted benefit covers the premium.
InsuranceRationality insurance_rationality(const Distortion& g_insurer, double b_insurer,
                                           const Distortion& g_buyer, double theta,
                                           const PiecewiseLinearMap& f, const LossModel& X);

}  // namespace riskshare
