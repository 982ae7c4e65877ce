#include "riskshare/constrained.hpp"
#include "riskshare/errors.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace riskshare;
using testsupport::uniform;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

LossModel uniform01() { return LossModel::empirical_quantile({{0, 1}, {1, 0}}); }

std::vector<AgentSpec> avar_pair_agents() {
    return {AgentSpec(Distortion::avar(1.1), 0, 0.3, -2.2), AgentSpec(Distortion::avar(1.5), 0, 0, -2.2)};
}

// Attachment point of the insured layer: first level with a positive insured share.
double attachment(const Ladder& L) {
    for (std::size_t k = 0; k < L.layers(); ++k) {
        if (L.weights()[k][1] > 0) return L.breakpoints()[k];
    }
    return kInf;
}

}  // namespace

TEST(Constrained, SlackConstraintMatchesUnconstrained) {
    const auto X = LossModel::exponential(1.0);
    const auto agents = avar_pair_agents();
    auto [L0, r0] = pareto_solve(agents, X);
    const double used = distorted_expectation(Distortion::avar(2.0), L0.component(0), X);
    auto [L, r] = constrained_pareto_solve(agents, {{0, Distortion::avar(2.0), used + 0.5, std::nullopt}}, X);
    EXPECT_EQ(r.lambdas[0], 0.0);
    EXPECT_EQ(L, L0);
}

TEST(Constrained, AvarBudgetMultiplier) {
    auto [L, r] = constrained_pareto_solve(avar_pair_agents(), {{0, Distortion::avar(2.0), 0.249, std::nullopt}}, uniform01());
    EXPECT_NEAR(r.lambdas[0], 0.18, 1e-2);
    EXPECT_LE(r.constraint_values[0], 0.249 + 1e-8);
    EXPECT_LE(std::abs(r.lambdas[0] * (r.constraint_values[0] - 0.249)), 1e-8);
    // capped deductible: insurer covers one middle band
    const auto sw = L.switch_points(0);
    ASSERT_EQ(sw.size(), 2u);
    EXPECT_EQ(L.marginal(0, 0.5 * (sw[0] + sw[1])), 1.0);
    EXPECT_EQ(L.marginal(0, 0.5 * sw[0]), 0.0);
    // crossings mapped through S(t) = 1 - t
    const auto c = avar_two_agent_crossings(1.1, 1.5, 2, 1.2, 0.3, r.lambdas[0]);
    EXPECT_EQ(c.regime, "capped");
    EXPECT_NEAR(1.0 - sw[1], c.p1, 1e-8);
    EXPECT_NEAR(1.0 - sw[0], c.p2, 1e-8);
}

TEST(Constrained, CoverageShrinksWithBudget) {
    const auto X = LossModel::exponential(1.0);
    const auto agents = avar_pair_agents();
    double prev = kInf;
    for (double B : {0.5, 0.2, 0.05, 0.01, 1e-3, 1e-5}) {
        auto [L, r] = constrained_pareto_solve(agents, {{0, Distortion::avar(2.0), B, std::nullopt}}, X);
        const double mean = expectation(L.component(0), X);
        EXPECT_LE(mean, prev + 1e-12);
        EXPECT_LE(r.constraint_values[0], B + 1e-8);
        prev = mean;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(Constrained, ResidualMonotoneInLambda) {
    const auto X = LossModel::exponential(1.3);
    const auto agents = avar_pair_agents();
    double prev = kInf;
    for (double lam = 0.0; lam < 0.85; lam += 0.02) {
        auto [L, r] = constrained_pareto_solve(agents, {{0, Distortion::avar(2.0), 1.0, lam}}, X);
        EXPECT_LE(r.constraint_values[0], prev + 1e-12);
        prev = r.constraint_values[0];
    }
}

TEST(Constrained, InvalidInputs) {
    const auto X = LossModel::exponential(1.0);
    const auto agents = avar_pair_agents();
    EXPECT_THROW(constrained_pareto_solve(agents, {{0, Distortion::avar(2.0), -1.0, std::nullopt}}, X), DomainError);
    EXPECT_THROW(constrained_pareto_solve(agents, {{0, Distortion::dual_power(2.0).dual(), 1.0, std::nullopt}}, X),
                 DomainError);
    EXPECT_THROW(constrained_pareto_solve(agents, {{5, Distortion::avar(2.0), 1.0, std::nullopt}}, X), DomainError);
}

TEST(Constrained, MultipleConstraintsFeasible) {
    const auto X = LossModel::exponential(1.0);
    std::vector<AgentSpec> agents{AgentSpec(Distortion::avar(1.1), 0, 0.3, -2.2), AgentSpec(Distortion::avar(1.5), 0, 0, -2.2),
                                  AgentSpec(Distortion::proportional_hazards(0.7), 0, 0.1, -2.0)};
    std::vector<ConstraintSpec> cs{{0, Distortion::avar(2.0), 0.3, std::nullopt},
                                   {2, Distortion::avar(1.5), 0.2, std::nullopt}};
    auto [L, r] = constrained_pareto_solve(agents, cs, X);
    EXPECT_TRUE(r.best_effort);
    for (std::size_t k = 0; k < cs.size(); ++k) {
        EXPECT_LE(r.constraint_values[k], cs[k].B + 1e-8);
        EXPECT_LE(std::abs(r.lambdas[k] * (r.constraint_values[k] - cs[k].B)), 1e-8);
    }
}

TEST(Buyer, ClassifyExamples) {
    // C5
    auto c5 = classify_exponential_avar(2.5, 0.1, 2.0, 1.5, 1.0, 1.0);
    EXPECT_EQ(c5.label, "C5");
    EXPECT_EQ(c5.d, kInf);
    EXPECT_EQ(c5.lambda, 0.0);
    // C1
    const double beta = 2.0;
    auto c1 = classify_exponential_avar(0.1, 0.2, 3.0, beta, 1.0, 1 + std::log(beta) + 0.1);
    EXPECT_EQ(c1.label, "C1");
    EXPECT_EQ(c1.d, 0.0);
    EXPECT_EQ(c1.lambda, 0.0);
    // C2b2
    const double theta = 0.5;
    const double b = 0.1;
    const double mu = 1.0;
    const double B = 1.1;
    ASSERT_LT(mu * B, 1 + std::log(beta * (1 + b) / (1 + theta)));
    auto c2 = classify_exponential_avar(theta, b, 3.0, beta, mu, B);
    EXPECT_EQ(c2.label, "C2b2");
    EXPECT_NEAR(c2.d, -B + (1 + std::log(beta)) / mu, 1e-15);
    EXPECT_NEAR(c2.lambda, (1 + b) - (1 + theta) / beta * std::exp(mu * B - 1), 1e-15);

    EXPECT_THROW((void)classify_exponential_avar(0.5, 0.1, 1.5, 2.0, 1.0, 1.0), DomainError);
}

TEST(Buyer, SolveExamples) {
    const auto X = LossModel::exponential(1.0);
    // C5: too expensive
    auto s5 = buyer_solve({Distortion::avar(2.0), Distortion::avar(1.5), 0.1, 1.5, 1.0}, X);
    EXPECT_EQ(s5.lambda, 0.0);
    EXPECT_EQ(s5.ladder, Ladder::single_owner(2, 0));
    EXPECT_EQ(s5.report.case_label, "C5");
    // C1: full insurance
    const double beta = 1.5;
    auto s1 = buyer_solve({Distortion::avar(2.0), Distortion::avar(beta), 0.3, 0.2, 1 + std::log(beta) + 0.01}, X);
    EXPECT_EQ(s1.lambda, 0.0);
    EXPECT_EQ(s1.ladder, Ladder::single_owner(2, 1));
    // C3b
    const double mu = 1.0;
    const double b = 0.1;
    const double theta = 0.5;
    const double B = 0.8;
    auto s3 = buyer_solve({Distortion::avar(3.0), Distortion::avar(2.0), b, theta, B}, X);
    EXPECT_EQ(s3.report.case_label, "C3b");
    EXPECT_NEAR(attachment(s3.ladder), std::log(2.0 / (mu * B)) / mu, 1e-9);
    EXPECT_NEAR(s3.lambda, (1 + b) / (mu * B) - (1 + theta) / 2.0, 1e-9);
}

TEST(Buyer, SureLayerGoesToCheaperSide) {
    // X >= 2 surely: the base layer costs (1 + b) retained against (1 + theta) insured
    const auto X = LossModel::discrete({2.0, 5.0}, {0.6, 0.4});
    const auto s = buyer_solve({Distortion::proportional_hazards(0.5), Distortion::avar(1.2), 0.13, 0.3, 100.0}, X);
    EXPECT_EQ(s.lambda, 0.0);
    EXPECT_EQ(s.ladder.marginal(1, 1.0), 0.0);
    EXPECT_EQ(s.ladder.marginal(1, 3.0), 1.0);
    EXPECT_NEAR(s.report.objective, 1.13 * 2.0 + 1.3 * 0.4 * 3.0, 1e-12);
}

TEST(Buyer, ClassifierAgreesWithSolver) {
    std::mt19937_64 rng(99);
    for (const auto& label : testsupport::region_labels()) {
        for (int k = 0; k < 20; ++k) {
            const auto q = testsupport::sample_region(rng, label);
            const auto cl = classify_exponential_avar(q.theta, q.b, q.alpha, q.beta, q.mu, q.B);
            ASSERT_EQ(cl.label, label);
            const auto s = buyer_solve({Distortion::avar(q.alpha), Distortion::avar(q.beta), q.b, q.theta, q.B},
                                       LossModel::exponential(q.mu));
            EXPECT_EQ(s.report.case_label, label);
            EXPECT_NEAR(s.lambda, cl.lambda, 1e-8) << label;
            const double used = s.report.constraint_values[0];
            EXPECT_LE(used, q.B + 1e-8);
            EXPECT_LE(std::abs(s.lambda * (used - q.B)), 1e-8);
            if (!cl.non_unique) {
                const double d = attachment(s.ladder);
                if (std::isinf(cl.d)) {
                    EXPECT_TRUE(std::isinf(d)) << label;
                } else {
                    EXPECT_NEAR(d, cl.d, 1e-8) << label;
                }
            }
        }
    }
}

TEST(Buyer, C4RepresentativesAreOptimal) {
    std::mt19937_64 rng(7);
    for (const char* label : {"C4a", "C4b"}) {
        for (int k = 0; k < 10; ++k) {
            const auto q = testsupport::sample_region(rng, label);
            const auto cl = classify_exponential_avar(q.theta, q.b, q.alpha, q.beta, q.mu, q.B);
            ASSERT_TRUE(cl.non_unique);
            ASSERT_EQ(cl.representatives.size(), 3u);
            const auto X = LossModel::exponential(q.mu);
            const auto s = buyer_solve({Distortion::avar(q.alpha), Distortion::avar(q.beta), q.b, q.theta, q.B}, X);
            for (const auto& rep : cl.representatives) {
                const auto f = rep.component(1);
                EXPECT_LE(distorted_expectation(Distortion::avar(q.beta), f, X), q.B + 1e-9);
                const double obj = (1 + q.b) * distorted_expectation(Distortion::avar(q.alpha), rep.component(0), X) +
                                   (1 + q.theta) * expectation(f, X);
                EXPECT_NEAR(obj, s.report.objective, 1e-9) << label;
            }
        }
    }
}

TEST(Buyer, RelaxationNeverHurts) {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 30; ++k) {
        const auto g = testsupport::random_concave(rng);
        const auto h = testsupport::random_concave(rng);
        const double b = uniform(rng, 0, 0.4);
        const double theta = uniform(rng, 0.05, 1.0);
        const auto X = k % 2 ? LossModel::exponential(uniform(rng, 0.5, 2)) : testsupport::random_discrete(rng, 5, 0, 6);
        double prev = kInf;
        for (double B : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) {
            const auto s = buyer_solve({g, h, b, theta, B}, X);
            EXPECT_LE(s.report.objective, prev + 1e-9);
            EXPECT_LE(std::abs(s.lambda * (s.report.constraint_values[0] - B)), 1e-8);
            prev = s.report.objective;
        }
    }
}

TEST(Crossings, Examples) {
    const auto c = avar_two_agent_crossings(1.1, 1.5, 2, 1.2, 0.3, 0.18);
    EXPECT_EQ(c.regime, "capped");
    EXPECT_NEAR(c.p1, 0.5143, 5e-5);
    EXPECT_NEAR(c.p2, 0.7636, 5e-5);
    EXPECT_TRUE(c.verified);

    const double a1 = 1.1;
    const double theta = 1.2;
    const double b1 = 0.3;
    const double threshold = (1 + theta) + ((1 + b1) * a1 - (1 + theta)) * theta / (theta - b1);
    const auto z = avar_two_agent_crossings(a1, 0.9 * threshold + 0.1, 2, theta, b1, 0.0);
    EXPECT_EQ(z.regime, "zero");
    EXPECT_TRUE(z.verified);

    EXPECT_THROW((void)avar_two_agent_crossings(1.1, 1.5, 2, 0.3, 0.3, 0.1), DomainError);
}

TEST(Crossings, CurvesMeetAtMinusOne) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const double a1 = uniform(rng, 1.05, 3);
        const double a2 = uniform(rng, 1.05, 3);
        const double beta = uniform(rng, 1.05, 3);
        const double b1 = uniform(rng, 0, 0.3);
        const double lam = uniform(rng, 0, 0.3);
        const double theta = b1 + lam + uniform(rng, 0.05, 1.5);
        const AgentSpec ins(Distortion::avar(a1), 0, b1, -(1 + theta));
        const AgentSpec buy(Distortion::avar(a2), 0, 0, -(1 + theta));
        EXPECT_NEAR(risk_load_curve(ins, lam, Distortion::avar(beta))(1.0), -1.0, 1e-14);
        EXPECT_NEAR(risk_load_curve(buy)(1.0), -1.0, 1e-14);
        const auto c = avar_two_agent_crossings(a1, a2, beta, theta, b1, lam);
        EXPECT_TRUE(c.verified) << a1 << " " << a2 << " " << beta << " " << theta << " " << b1 << " " << lam;
    }
}

TEST(Crossings, MatchSolverBreakpoints) {
    // Uniform(0,1) makes S(t) = 1 - t; fixed multipliers bypass the budget search
    std::mt19937_64 rng(6);
    int checked = 0;
    for (int k = 0; k < 200 && checked < 30; ++k) {
        const double a1 = uniform(rng, 1.05, 2);
        const double a2 = uniform(rng, 1.05, 3);
        const double beta = uniform(rng, 1.05, 3);
        const double b1 = uniform(rng, 0, 0.3);
        const double lam = uniform(rng, 0, 0.3);
        const double theta = b1 + lam + uniform(rng, 0.05, 1.5);
        const auto c = avar_two_agent_crossings(a1, a2, beta, theta, b1, lam);
        if (c.regime == "zero") continue;
        ++checked;
        const std::vector<AgentSpec> agents{AgentSpec(Distortion::avar(a1), 0, b1, -(1 + theta)),
                                            AgentSpec(Distortion::avar(a2), 0, 0, -(1 + theta))};
        auto [L, r] = constrained_pareto_solve(agents, {{0, Distortion::avar(beta), 1.0, lam}}, uniform01());
        const auto sw = L.switch_points(0);
        std::vector<double> ps;
        for (double t : sw) ps.push_back(1.0 - t);
        std::sort(ps.begin(), ps.end());
        if (c.regime == "capped") {
            ASSERT_EQ(ps.size(), 2u);
            EXPECT_NEAR(ps[0], c.p1, 1e-8);
            EXPECT_NEAR(ps[1], c.p2, 1e-8);
        } else {
            ASSERT_EQ(ps.size(), 1u) << c.regime;
            EXPECT_NEAR(ps[0], c.regime == "deductible_a" ? c.p2 : c.p1, 1e-8);
        }
    }
    EXPECT_GT(checked, 5);
}
