#include "riskshare/errors.hpp"
#include "riskshare/load_curve.hpp"
#include "riskshare/oracle.hpp"
#include "riskshare/pareto.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace riskshare;
using testsupport::uniform;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Distortion pwl_insurer_g() { return Distortion::piecewise_linear({{0, 0}, {0.5, 9.0 / 16}, {1, 1}}); }
Distortion pwl_buyer_g() { return Distortion::piecewise_linear({{0, 0}, {0.25, 1.0 / 3}, {0.75, 5.0 / 6}, {1, 1}}); }

std::vector<AgentSpec> insurance_agents(const Distortion& g1, const Distortion& g2, double theta, double b1) {
    return {AgentSpec(g1, 0, b1, -(1 + theta)), AgentSpec(g2, 0, 0, -(1 + theta))};
}

std::vector<AgentSpec> random_agents(std::mt19937_64& rng, std::size_t n) {
    const double sign = rng() % 2 ? 1.0 : -1.0;
    std::vector<AgentSpec> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double b = uniform(rng, 0, 1);
        const double s = sign * uniform(rng, 0.2, 2.0);
        out.emplace_back(testsupport::random_concave(rng), 0, b, s - 1 - b);
    }
    return out;
}

bool in_ties(const SolveReport& r, double t) {
    for (const auto& seg : r.ties) {
        if (t >= seg.lo - 1e-9 && t <= seg.hi + 1e-9) return true;
    }
    return false;
}

bool near_breakpoint(const Ladder& L, double t) {
    for (double b : L.breakpoints()) {
        if (std::abs(t - b) < 1e-6) return true;
    }
    return false;
}

}  // namespace

TEST(Pareto, ExistenceExamples) {
    auto agent = [](double s) { return AgentSpec(Distortion::identity(), 0, 0, s - 1); };
    EXPECT_EQ(existence_check({agent(0.5), agent(0.2)}), Existence::Solvable);
    EXPECT_EQ(existence_check({agent(-0.5), agent(-0.2)}), Existence::Solvable);
    EXPECT_EQ(existence_check({agent(-0.5), agent(0.2)}), Existence::Unsolvable);
    EXPECT_EQ(existence_check({agent(0.0), agent(0.2)}), Existence::Unsolvable);
    EXPECT_EQ(existence_check({agent(0.0), agent(0.0)}), Existence::DegenerateAllZero);
    EXPECT_THROW(pareto_solve({agent(-0.5), agent(0.2)}, LossModel::exponential(1.0)), UnsolvableError);
}

TEST(Pareto, RiskLoadCurveExamples) {
    const double theta = 1.2;
    const double a2 = 1.5;
    const auto Q = risk_load_curve(AgentSpec(Distortion::avar(a2), 0, 0, -(1 + theta)));
    for (double p = 0.0; p <= 1.0; p += 0.01) {
        EXPECT_NEAR(Q(p), (std::min(a2 * p, 1.0) - (1 + theta) * p) / theta, 1e-14);
    }
    EXPECT_TRUE(Q.is_piecewise_linear());
    const auto I = risk_load_curve(AgentSpec(Distortion::identity(), 0, 0, 0));
    EXPECT_NEAR(I(0.37), 0.37, 1e-15);
    std::mt19937_64 rng(1);
    for (const auto& a : random_agents(rng, 20)) {
        const auto q = risk_load_curve(a);
        EXPECT_NEAR(std::abs(q(1.0)), 1.0, 1e-12);
        EXPECT_NEAR(q(0.0), 0.0, 1e-15);
    }
    EXPECT_THROW((void)risk_load_curve(AgentSpec(Distortion::identity(), 0, 0, -1)), DomainError);
    EXPECT_THROW((void)risk_load_curve(AgentSpec(Distortion::identity(), 0, 0, 0), 0.5), DomainError);
}

TEST(Pareto, ThreeLayerInsuranceLadder) {
    const auto X = LossModel::exponential(1.0);
    auto [L, rep] = pareto_solve(insurance_agents(pwl_insurer_g(), pwl_buyer_g(), 1.0, 1.0 / 3), X);
    ASSERT_EQ(L.layers(), 3u);
    EXPECT_NEAR(L.breakpoints()[1], std::log(1.5), 1e-12);
    EXPECT_NEAR(L.breakpoints()[2], std::log(3.0), 1e-12);
    EXPECT_EQ(L.weights()[0], (std::vector<double>{1, 0}));
    EXPECT_EQ(L.weights()[1], (std::vector<double>{0, 1}));
    EXPECT_EQ(L.weights()[2], (std::vector<double>{1, 0}));
    EXPECT_NEAR(rep.objective, rep.envelope, 1e-9);
}

TEST(Pareto, CappedDeductibleLadder) {
    const auto g2 = Distortion::piecewise_linear({{0, 0}, {0.5, 0.75}, {1, 1}});
    auto [L, rep] = pareto_solve(insurance_agents(pwl_buyer_g(), g2, 1.0, 1.0 / 3), LossModel::exponential(1.0));
    // mirror image of the three-layer insurer share
    const auto base = pareto_solve(insurance_agents(pwl_insurer_g(), pwl_buyer_g(), 1.0, 1.0 / 3), LossModel::exponential(1.0)).first;
    for (double x = 0.0; x < 6.0; x += 0.01) EXPECT_NEAR(L.apply(0, x), x - base.apply(0, x), 1e-12);
    EXPECT_NEAR(L.apply(0, 50.0), std::log(2.0), 1e-12);
}

TEST(Pareto, IdenticalAgentsTieRules) {
    const auto X = LossModel::exponential(0.7);
    const AgentSpec a(Distortion::avar(1.8), 0, 0.2, 0.1);
    std::vector<double> objectives;
    for (TieRule rule : {TieRule::Lowest, TieRule::Highest, TieRule::Split}) {
        SolveOptions opt;
        opt.tie = rule;
        auto [L, rep] = pareto_solve({a, a, a}, X, opt);
        objectives.push_back(rep.objective);
        if (rule == TieRule::Lowest) {
            EXPECT_EQ(L, Ladder::single_owner(3, 0));
            EXPECT_FALSE(rep.ties.empty());
        }
    }
    EXPECT_NEAR(objectives[0], objectives[1], 1e-12);
    EXPECT_NEAR(objectives[0], objectives[2], 1e-12);
}

TEST(Pareto, TieRuleInvarianceRandom) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 30; ++t) {
        const auto agents = random_agents(rng, 2 + rng() % 2);
        const auto X = t % 2 ? LossModel::exponential(uniform(rng, 0.5, 2)) : testsupport::random_discrete(rng, 6, 0, 8);
        SolveOptions lo;
        SolveOptions hi;
        hi.tie = TieRule::Highest;
        SolveOptions sp;
        sp.tie = TieRule::Split;
        const double a = pareto_solve(agents, X, lo).second.objective;
        EXPECT_NEAR(a, pareto_solve(agents, X, hi).second.objective, 1e-9 * std::max(1.0, std::abs(a)));
        EXPECT_NEAR(a, pareto_solve(agents, X, sp).second.objective, 1e-9 * std::max(1.0, std::abs(a)));
    }
}

TEST(Pareto, ObjectiveMatchesEnvelope) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 40; ++t) {
        const auto agents = random_agents(rng, 2 + rng() % 3);
        const auto X = t % 2 ? LossModel::exponential(uniform(rng, 0.5, 2)) : testsupport::random_discrete(rng, 7, 0, 8);
        auto [L, rep] = pareto_solve(agents, X);
        EXPECT_NEAR(rep.objective, rep.envelope, 1e-9 * std::max(1.0, std::abs(rep.envelope)));
        // tranche integrals over the solved ladder, weighted by 1/|s_i|
        double sum = 0.0;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            sum += tranche_integral(agents[i].g(), agents[i].b(), agents[i].c(), L.component(i), X) /
                   std::abs(agents[i].s());
        }
        EXPECT_NEAR(sum, rep.envelope, 1e-9 * std::max(1.0, std::abs(rep.envelope)));
    }
}

TEST(Pareto, BruteForceExample) {
    const auto X = LossModel::discrete({0.0, 1.0, 2.5, 4.0}, {0.4, 0.3, 0.2, 0.1});
    const auto agents = insurance_agents(Distortion::avar(1.1), Distortion::avar(1.5), 1.2, 0.3);
    const auto bf = brute_force_discrete({X, agents});
    EXPECT_NEAR(pareto_solve(agents, X).second.objective, bf.objective, 1e-9);
}

TEST(Pareto, BruteForceRandom) {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 200; ++t) {
        const auto agents = random_agents(rng, 1 + rng() % 3);
        const auto X = testsupport::random_discrete(rng, 1 + rng() % 6, 0, 10);
        const auto bf = brute_force_discrete({X, agents});
        EXPECT_NEAR(pareto_solve(agents, X).second.objective, bf.objective, 1e-9 * std::max(1.0, std::abs(bf.objective)));
    }
}

TEST(Pareto, HyperplaneExamples) {
    const auto X = LossModel::exponential(1.0);
    std::vector<AgentSpec> agents{AgentSpec(Distortion::avar(1.5), 0, 0.2, 0.3), AgentSpec(Distortion::dual_power(2), 0, 0, 0.5),
                                  AgentSpec(Distortion::proportional_hazards(0.6), 0, 0.1, -0.2)};
    auto [L, rep] = pareto_solve(agents, X);
    const auto hp = hyperplane(agents, rep);
    std::vector<double> v;
    for (const auto& a : rep.agents) v.push_back(a.value);
    EXPECT_TRUE(hp.contains(v));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(hp.coefficients[i], 1.0 / agents[i].s(), 1e-15);

    const auto moved = evaluate_ladder(agents, L.shift({0.7, -1.2, 0.5}), X);
    std::vector<double> w;
    for (const auto& a : moved.agents) w.push_back(a.value);
    EXPECT_TRUE(hp.contains(w));

    v[0] += 1e-3;
    EXPECT_FALSE(hp.contains(v));
}

TEST(Pareto, DeltaFamilyExamples) {
    const auto X = LossModel::exponential(1.0);
    const auto g1 = Distortion::proportional_hazards(0.6);
    const auto g2 = Distortion::dual_power(2.5);
    const auto zero = delta_family_solve(g1, g2, 0.0, 0.0, 0.0, X);
    for (double x : {0.0, 0.5, 3.0, 20.0}) EXPECT_NEAR(zero.apply(0, x), 0.0, 1e-15);

    Ladder prev = zero;
    for (double delta : {0.2, 0.5, 1.0, 2.0, 5.0}) {
        const auto L = delta_family_solve(g1, g2, 0.0, 0.0, delta, X);
        for (double x = 0.0; x < 10.0; x += 0.05) EXPECT_GE(L.apply(0, x), prev.apply(0, x) - 1e-12);
        prev = L;
    }

    // identical distortions at delta = 1: every tranche costs the same
    const auto same = delta_family_solve(g1, g1, 0.0, 0.0, 1.0, X);
    const auto f = same.component(0);
    const double obj = distorted_expectation(g1, f, X) - expectation(f, X) +
                       (expectation(f, X) - distorted_expectation(g1, f, X));
    EXPECT_NEAR(obj, 0.0, 1e-12);
}

TEST(Pareto, DeductibleExamples) {
    const auto X = LossModel::exponential(1.0);
    // PH pair, buyer more averse, (1 - c1)/(1 - c2) below kappa
    {
        const double theta = 1.0;
        const double b1 = 0.1;
        const double kappa = (theta - b1) / (theta * (1 + b1));
        ASSERT_LT((1 - 0.9) / (1 - 0.5), kappa);
        const auto r = deductible_two_agent(Distortion::proportional_hazards(0.9), Distortion::proportional_hazards(0.5),
                                            theta, b1, X);
        EXPECT_EQ(r.kind, DeductibleResult::Kind::Full);
        EXPECT_EQ(r.d, 0.0);
    }
    {
        const double theta = 0.5;
        const double b1 = 0.1;
        const double kappa = (theta - b1) / (theta * (1 + b1));
        ASSERT_GT((1.9 - 1) / (2.0 - 1), kappa);
        const auto r = deductible_two_agent(Distortion::avar(1.9), Distortion::avar(2.0), theta, b1, X);
        EXPECT_EQ(r.kind, DeductibleResult::Kind::Zero);
        EXPECT_EQ(r.d, kInf);
        const auto dp = deductible_two_agent(Distortion::dual_power(1.9), Distortion::dual_power(2.0), theta, b1, X);
        EXPECT_EQ(dp.kind, DeductibleResult::Kind::Zero);
    }
    EXPECT_THROW((void)deductible_two_agent(pwl_insurer_g(), pwl_buyer_g(), 1.0, 1.0 / 3, X), DomainError);
}

TEST(Pareto, DeductibleMatchesSolver) {
    // shapes where the ratio is monotone; the insurer's share should start at d
    const std::vector<std::pair<Distortion, Distortion>> pairs{
        {Distortion::proportional_hazards(0.9), Distortion::proportional_hazards(0.5)},
        {Distortion::avar(1.3), Distortion::avar(2.5)},
        {Distortion::dual_power(1.5), Distortion::dual_power(3.0)},
    };
    for (const auto& X : {LossModel::exponential(1.0), LossModel::discrete({0, 1, 2, 3.5, 6}, {0.3, 0.3, 0.2, 0.15, 0.05})}) {
        for (const auto& [g1, g2] : pairs) {
            for (double b1 : {0.05, 0.3, 0.6, 0.85}) {
                const double theta = 1.0;
                const auto r = deductible_two_agent(g1, g2, theta, b1, X);
                auto [L, rep] = pareto_solve(insurance_agents(g1, g2, theta, b1), X);
                const auto sw = L.switch_points(0);
                EXPECT_LE(sw.size(), 1u);
                if (r.kind == DeductibleResult::Kind::Zero) {
                    EXPECT_NEAR(L.apply(0, 50.0), 0.0, 1e-9) << g1.name() << " b1=" << b1;
                } else {
                    // insurer's payout is (x - d)_+
                    for (double x : {0.0, 0.5, 1.0, 2.0, 5.0, 9.0}) {
                        EXPECT_NEAR(L.apply(0, x), std::max(0.0, x - r.d), 1e-9) << g1.name() << " b1=" << b1;
                    }
                }
            }
        }
    }
}

TEST(Pareto, ComparativeStatics) {
    const auto X = LossModel::exponential(1.0);
    std::mt19937_64 rng(55);
    auto marginal_ok = [&](const Ladder& A, const SolveReport& ra, const Ladder& B, const SolveReport& rb) {
        // B's insurer marginal dominates A's at non-tied levels
        for (double t = 0.013; t < 12.0; t += 0.05) {
            if (in_ties(ra, t) || in_ties(rb, t) || near_breakpoint(A, t) || near_breakpoint(B, t)) continue;
            if (B.marginal(0, t) < A.marginal(0, t) - 1e-12) return false;
        }
        return true;
    };
    for (int k = 0; k < 40; ++k) {
        const auto g1 = testsupport::random_concave(rng);
        const auto g2 = testsupport::random_concave(rng);
        const double b1 = uniform(rng, 0.0, 0.5);
        const double th1 = uniform(rng, b1 + 0.05, 1.5);
        const double th2 = th1 + uniform(rng, 0.05, 1.0);
        auto [A, ra] = pareto_solve(insurance_agents(g1, g2, th1, b1), X);
        auto [B, rb] = pareto_solve(insurance_agents(g1, g2, th2, b1), X);
        EXPECT_TRUE(marginal_ok(A, ra, B, rb)) << "theta " << g1.name() << " " << g2.name();

        const double b2 = b1 + uniform(rng, 0.01, th1 - b1);
        auto [C, rc] = pareto_solve(insurance_agents(g1, g2, th1, b2), X);
        EXPECT_TRUE(marginal_ok(C, rc, A, ra)) << "b1 " << g1.name() << " " << g2.name();
    }
    // more averse buyer within a family
    for (int k = 0; k < 20; ++k) {
        const auto g1 = testsupport::random_concave(rng);
        const double b1 = uniform(rng, 0.0, 0.5);
        const double theta = uniform(rng, b1 + 0.05, 1.5);
        const double c = uniform(rng, 0.3, 0.9);
        const std::vector<std::pair<Distortion, Distortion>> pairs{
            {Distortion::proportional_hazards(c), Distortion::proportional_hazards(c * uniform(rng, 0.3, 0.95))},
            {Distortion::avar(1 + c), Distortion::avar((1 + c) * uniform(rng, 1.05, 2.0))},
            {Distortion::dual_power(1 + c), Distortion::dual_power((1 + c) * uniform(rng, 1.05, 2.0))}};
        for (const auto& [lo, hi] : pairs) {
            auto [A, ra] = pareto_solve(insurance_agents(g1, lo, theta, b1), X);
            auto [B, rb] = pareto_solve(insurance_agents(g1, hi, theta, b1), X);
            EXPECT_TRUE(marginal_ok(A, ra, B, rb)) << "aversion " << g1.name() << " " << hi.name();
        }
    }
}

TEST(Pareto, CriticalProbabilitiesExactForPwl) {
    const double theta = 1.0;
    const std::vector<LoadCurve> curves{risk_load_curve(AgentSpec(pwl_insurer_g(), 0, 1.0 / 3, -(1 + theta))),
                                        risk_load_curve(AgentSpec(pwl_buyer_g(), 0, 0, -(1 + theta)))};
    const auto ps = critical_probabilities(curves, 2048);
    auto has = [&](double p) {
        return std::any_of(ps.begin(), ps.end(), [&](double q) { return std::abs(q - p) < 1e-14; });
    };
    EXPECT_TRUE(has(1.0 / 3));
    EXPECT_TRUE(has(2.0 / 3));
}
