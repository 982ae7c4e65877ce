#include "riskshare/constrained.hpp"

#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace riskshare {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MultiplierSolve {
    Ladder ladder;
    double lambda = 0.0;
    double residual = 0.0;
    bool mixture = false;
    std::vector<Segment> ties;
};

struct Probe {
    LadderBuild built;
    double residual;
};

// Finds the smallest lambda in [0, cap) with residual(lambda) <= 0, the
// residual being non-increasing. Jumps in the residual are closed by mixing
// the ladders on either side of the jump.
MultiplierSolve solve_multiplier(const std::function<Probe(double)>& probe, double cap, const SolveOptions& opt) {
    Probe at0 = probe(0.0);
    if (at0.residual <= opt.tol_residual) {
        return {std::move(at0.built.ladder), 0.0, at0.residual, false, std::move(at0.built.ties)};
    }
    double hi = 0.0;
    std::optional<Probe> at_hi;
    if (std::isfinite(cap)) {
        hi = cap * (1.0 - 1e-9);
        at_hi = probe(hi);
        if (at_hi->residual > opt.tol_residual) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "constraint cannot be met before the risk-load normalizer changes sign at lambda = " << cap;
            throw InfeasibleError(msg.str());
        }
    } else {
        hi = 1.0;
        at_hi = probe(hi);
        for (int it = 0; it < 200 && at_hi->residual > opt.tol_residual; ++it) {
            hi *= 2.0;
            at_hi = probe(hi);
        }
        if (at_hi->residual > opt.tol_residual) throw InfeasibleError("no multiplier restores feasibility");
    }
    double lo = 0.0;
    Probe at_lo = std::move(at0);
    while (hi - lo > opt.tol_lambda) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        Probe p = probe(mid);
        if (p.residual > 0.0) {
            lo = mid;
            at_lo = std::move(p);
        } else {
            hi = mid;
            at_hi = std::move(p);
        }
    }
    MultiplierSolve out{at_hi->built.ladder, hi, at_hi->residual, false, at_hi->built.ties};
    if (at_hi->residual < -opt.tol_residual) {
        const double tau = at_lo.residual / (at_lo.residual - at_hi->residual);
        out.ladder = mix(at_hi->built.ladder, at_lo.built.ladder, tau);
        out.residual = tau * at_hi->residual + (1.0 - tau) * at_lo.residual;
        out.mixture = true;
    }
    return out;
}

std::vector<LoadCurve> lagrangian_curves(const std::vector<AgentSpec>& agents,
                                         const std::vector<ConstraintSpec>& constraints,
                                         const std::vector<double>& lambdas) {
    std::vector<LoadCurve> curves;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        double lam = 0.0;
        std::optional<Distortion> h;
        for (std::size_t c = 0; c < constraints.size(); ++c) {
            if (constraints[c].agent == i) {
                lam = lambdas[c];
                h = constraints[c].h;
            }
        }
        const double s = agents[i].s();
        if (lam > 0.0 && s * (s + lam) <= 0.0) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "risk-load normalizer of agent " << i << " changes sign at lambda = " << lam;
            throw DomainError(msg.str());
        }
        curves.push_back(risk_load_curve(agents[i], lam, h));
    }
    return curves;
}

bool is_avar(const Distortion& g) { return std::holds_alternative<AVaR>(g.family()); }

std::string buyer_label(const BuyerProblem& pb, const LossModel& X, const BuyerSolution& sol) {
    const auto* e = std::get_if<Exponential>(&X.variant());
    if (e == nullptr || !is_avar(pb.g) || !is_avar(pb.h)) return {};
    const double alpha = std::get<AVaR>(pb.g.family()).alpha;
    const double beta = std::get<AVaR>(pb.h.family()).alpha;
    if (!(alpha > beta)) return {};
    const bool lam_pos = sol.lambda > 0.0;
    if (sol.report.tie_mixture || !sol.report.ties.empty()) return lam_pos ? "C4b" : "C4a";
    const auto& L = sol.ladder;
    std::size_t k = 0;
    while (k < L.layers() && L.weights()[k][1] == 0.0) ++k;
    if (k == L.layers()) return "C5";
    const double d = L.breakpoints()[k];
    if (d == 0.0 && !lam_pos) return "C1";
    const double mu = e->rate;
    if (d < std::log(beta) / mu * (1.0 - 1e-12)) {
        if (!lam_pos) return "C2a";
        return pb.theta <= pb.b ? "C2b1" : "C2b2";
    }
    return lam_pos ? "C3b" : "C3a";
}

Ladder insured_from(double d, double share, double cap_level) {
    // retained / insured ladder: insured takes `share` of [d, cap_level)
    std::vector<double> bp{0.0};
    std::vector<std::vector<double>> w;
    if (d > 0.0) {
        bp.push_back(d);
        w.push_back({1.0, 0.0});
    }
    w.push_back({1.0 - share, share});
    bp.push_back(cap_level);
    if (std::isfinite(cap_level)) {
        w.push_back({1.0, 0.0});
        bp.push_back(kInf);
    }
    return {std::move(bp), std::move(w)};
}

}  // namespace

std::pair<Ladder, SolveReport> constrained_pareto_solve(const std::vector<AgentSpec>& agents,
                                                        const std::vector<ConstraintSpec>& constraints,
                                                        const LossModel& X, const SolveOptions& opt) {
    if (agents.empty()) throw DomainError("at least one agent is required");
    if (existence_check(agents) != Existence::Solvable) {
        throw UnsolvableError("no Pareto optimal allocation exists: the 1 + b_i + c_i do not share a strict sign");
    }
    std::vector<double> lambdas(constraints.size(), 0.0);
    std::vector<std::size_t> free;
    for (std::size_t c = 0; c < constraints.size(); ++c) {
        const auto& cs = constraints[c];
        if (cs.agent >= agents.size()) throw DomainError("constraint refers to an unknown agent");
        if (cs.h.concavity() != Concavity::Concave) throw DomainError("constraint distortion must be concave");
        if (!(cs.B > 0.0)) throw DomainError("risk budget B must be positive");
        for (std::size_t o = 0; o < c; ++o) {
            if (constraints[o].agent == cs.agent) throw DomainError("at most one constraint per agent");
        }
        if (cs.lambda) {
            if (!(*cs.lambda >= 0.0)) throw DomainError("fixed multiplier must be non-negative");
            lambdas[c] = *cs.lambda;
        } else {
            free.push_back(c);
        }
    }

    auto residual = [&](const Ladder& L, std::size_t c) {
        const auto& cs = constraints[c];
        return distorted_expectation(cs.h, L.component(cs.agent), X) - cs.B;
    };

    std::optional<MultiplierSolve> last;
    bool converged = true;
    const int sweeps = free.size() > 1 ? 100 : 1;
    if (!free.empty()) {
        converged = false;
        for (int sweep = 0; sweep < sweeps && !converged; ++sweep) {
            double change = 0.0;
            for (std::size_t c : free) {
                const double s = agents[constraints[c].agent].s();
                const double cap = s < 0.0 ? -s : kInf;
                auto probe = [&](double lam) {
                    auto trial = lambdas;
                    trial[c] = lam;
                    LadderBuild b = build_ladder(lagrangian_curves(agents, constraints, trial), X, opt);
                    const double r = residual(b.ladder, c);
                    return Probe{std::move(b), r};
                };
                last = solve_multiplier(probe, cap, opt);
                change = std::max(change, std::abs(last->lambda - lambdas[c]));
                lambdas[c] = last->lambda;
            }
            converged = free.size() == 1 || change <= 10.0 * opt.tol_lambda;
        }
    }

    const auto curves = lagrangian_curves(agents, constraints, lambdas);
    Ladder ladder = last ? last->ladder : build_ladder(curves, X, opt).ladder;
    std::vector<Segment> ties = last ? last->ties : build_ladder(curves, X, opt).ties;

    SolveReport report = evaluate_ladder(agents, ladder, X);
    report.envelope = envelope_integral(curves, X, opt);
    report.ties = std::move(ties);
    report.lambdas = lambdas;
    report.tie_mixture = last && last->mixture;
    report.best_effort = free.size() > 1;
    for (std::size_t c = 0; c < constraints.size(); ++c) {
        report.constraint_values.push_back(residual(ladder, c) + constraints[c].B);
        // a fixed multiplier is a scan point, not a budget promise
        if (!constraints[c].lambda && report.constraint_values.back() > constraints[c].B + opt.tol_residual) {
            converged = false;
        }
    }
    report.converged = converged;
    if (free.size() <= 1 && !converged) throw InfeasibleError("constraints cannot be satisfied");
    return {std::move(ladder), std::move(report)};
}

BuyerSolution buyer_solve(const BuyerProblem& pb, const LossModel& X, const SolveOptions& options) {
    if (!(pb.B > 0.0)) throw DomainError("risk budget B must be positive");
    if (!(pb.b >= 0.0) || !(pb.theta >= 0.0)) throw DomainError("b and theta must be non-negative");
    if (pb.g.concavity() != Concavity::Concave || pb.h.concavity() != Concavity::Concave) {
        throw DomainError("distortions must be concave");
    }
    SolveOptions opt = options;
    opt.tie = TieRule::Lowest;  // insure only where the inequality is strict

    auto curves_at = [&](double lam) {
        return std::vector<LoadCurve>{LoadCurve({}, 0.0, 1.0),
                                      LoadCurve({{-(1.0 + pb.b), pb.g}, {lam, pb.h}}, 1.0 + pb.theta, 1.0)};
    };
    auto probe = [&](double lam) {
        LadderBuild b = build_ladder(curves_at(lam), X, opt);
        const double r = distorted_expectation(pb.h, b.ladder.component(1), X) - pb.B;
        return Probe{std::move(b), r};
    };
    MultiplierSolve m = solve_multiplier(probe, kInf, opt);

    BuyerSolution sol{m.ladder, m.lambda, {}};
    auto& rep = sol.report;
    const auto retained = m.ladder.component(0);
    const auto insured = m.ladder.component(1);
    AgentOutcome r0;
    r0.distorted = distorted_expectation(pb.g, retained, X);
    r0.mean = expectation(retained, X);
    r0.value = (1.0 + pb.b) * r0.distorted;
    AgentOutcome r1;
    r1.distorted = distorted_expectation(pb.h, insured, X);
    r1.mean = expectation(insured, X);
    r1.value = (1.0 + pb.theta) * r1.mean;
    rep.agents = {r0, r1};
    rep.objective = r0.value + r1.value;
    rep.envelope = envelope_integral(curves_at(m.lambda), X, opt);
    rep.ties = m.ties;
    rep.lambdas = {m.lambda};
    rep.constraint_values = {r1.distorted};
    rep.tie_mixture = m.mixture;
    rep.case_label = buyer_label(pb, X, sol);
    return sol;
}

Classification classify_exponential_avar(double theta, double b, double alpha, double beta, double mu, double B) {
    if (!(alpha > beta && beta > 1.0)) throw DomainError("classification requires alpha > beta > 1");
    if (!(mu > 0.0) || !(B > 0.0) || !(b >= 0.0) || !(theta > 0.0)) {
        throw DomainError("classification requires mu > 0, B > 0, b >= 0, theta > 0");
    }
    const double mB = mu * B;
    const double t5 = (1.0 + b) * alpha - 1.0;
    const double t4 = (1.0 + b) * beta - 1.0;
    Classification out;
    auto set = [&](const char* label, double d, double lam) {
        out.label = label;
        out.d = d;
        out.lambda = lam;
    };
    const double lam4 = ((1.0 + b) * alpha - (1.0 + theta)) / beta;
    const double d3b = std::log(beta / mB) / mu;
    const double lam3b = (1.0 + b) / mB - (1.0 + theta) / beta;
    const double d2b = -B + (1.0 + std::log(beta)) / mu;
    const double lam2b = (1.0 + b) - (1.0 + theta) / beta * std::exp(mB - 1.0);
    const double d_free = std::log((1.0 + theta) / (1.0 + b)) / mu;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    if (std::abs(theta - t5) <= 1e-12 * std::max(1.0, std::abs(t5))) {
        set("C4a", nan, 0.0);
    } else if (theta > t5) {
        set("C5", kInf, 0.0);
    } else if (mB <= beta / alpha) {
        set("C4b", nan, lam4);
    } else if (theta >= t4) {
        if (mB < (1.0 + b) * beta / (1.0 + theta)) {
            set("C3b", d3b, lam3b);
        } else {
            set("C3a", d_free, 0.0);
        }
    } else if (theta > b) {
        if (mB < 1.0) {
            set("C3b", d3b, lam3b);
        } else if (mB < 1.0 + std::log(beta * (1.0 + b) / (1.0 + theta))) {
            set("C2b2", d2b, lam2b);
        } else {
            set("C2a", d_free, 0.0);
        }
    } else {
        if (mB < 1.0) {
            set("C3b", d3b, lam3b);
        } else if (mB < 1.0 + std::log(beta)) {
            set("C2b1", d2b, lam2b);
        } else {
            set("C1", 0.0, 0.0);
        }
    }
    if (out.label == "C4a" || out.label == "C4b") {
        out.non_unique = true;
        // any cover above ln(alpha)/mu with H_h = min(B, beta/(mu alpha)) is optimal
        const double mBe = std::min(mB, beta / alpha);
        const double attach = std::log(alpha) / mu;
        const double m = mBe < beta / alpha ? std::log(beta * alpha / (beta - mBe * alpha)) / mu : kInf;
        out.representatives.push_back(insured_from(std::log(beta / mBe) / mu, 1.0, kInf));
        out.representatives.push_back(insured_from(attach, mBe * alpha / beta, kInf));
        out.representatives.push_back(insured_from(attach, 1.0, m));
    }
    return out;
}

AvarCrossings avar_two_agent_crossings(double alpha1, double alpha2, double beta, double theta, double b1,
                                       double lambda) {
    if (!(alpha1 > 1.0) || !(alpha2 > 1.0) || !(beta > 1.0)) throw DomainError("AVaR slopes must exceed 1");
    if (!(lambda >= 0.0) || !(b1 >= 0.0)) throw DomainError("lambda and b1 must be non-negative");
    if (!(theta > lambda + b1)) throw DomainError("crossing formulas require theta > lambda + b1");

    const double den2 = (1.0 + theta) * (b1 + lambda) - (1.0 + b1) * alpha1 * theta;
    const double p2 = (lambda * (1.0 + theta) - theta + b1) / den2;
    const double p1b = (theta - (b1 + lambda)) /
                       (theta * (1.0 + b1) * alpha1 - b1 * (1.0 + theta) + lambda * (theta * beta - (1.0 + theta)));
    const double pd1 = lambda * theta / (den2 + alpha2 * (theta - b1 - lambda));

    auto inside = [](double p, double lo, double hi) { return p > lo && p < hi; };
    AvarCrossings out;
    out.p2 = p2;
    out.p1 = p1b;
    if (beta > alpha2 && inside(pd1, 1.0 / beta, 1.0 / alpha2) && inside(p2, 1.0 / alpha2, 1.0 / alpha1)) {
        out.regime = "capped";
        out.p1 = pd1;
    } else if (inside(p2, std::max(1.0 / beta, 1.0 / alpha2), 1.0 / alpha1)) {
        out.regime = "deductible_a";
    } else if (inside(p1b, 1.0 / alpha2, 1.0 / beta)) {
        out.regime = "deductible_b";
    } else {
        out.regime = "zero";
    }

    // exact sign changes of Q1 - Q2 on the linear pieces
    AgentSpec insurer(Distortion::avar(alpha1), 0.0, b1, -(1.0 + theta));
    AgentSpec buyer(Distortion::avar(alpha2), 0.0, 0.0, -(1.0 + theta));
    const LoadCurve q1 = risk_load_curve(insurer, lambda, Distortion::avar(beta));
    const LoadCurve q2 = risk_load_curve(buyer);
    std::vector<double> grid{0.0, 1.0 / alpha1, 1.0 / alpha2, 1.0 / beta, 1.0};
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    bool below_somewhere = false;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k];
        const double b = grid[k + 1];
        const double da = q1(a) - q2(a);
        const double db = q1(b) - q2(b);
        if (q1(0.5 * (a + b)) < q2(0.5 * (a + b))) below_somewhere = true;
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
            out.exact_roots.push_back(a + (b - a) * da / (da - db));
        } else if (da == 0.0 && k > 0) {
            const double dp = q1(grid[k - 1]) - q2(grid[k - 1]);
            if ((dp < 0.0) != (db < 0.0) && dp != 0.0 && db != 0.0) out.exact_roots.push_back(a);
        }
    }
    auto near = [](double x, double y) { return std::abs(x - y) <= 1e-10; };
    const auto& r = out.exact_roots;
    if (out.regime == "zero") {
        out.verified = r.empty() && !below_somewhere;
    } else if (out.regime == "capped") {
        out.verified = r.size() == 2 && near(r[0], out.p1) && near(r[1], out.p2);
    } else {
        out.verified = r.size() == 1 && near(r[0], out.regime == "deductible_a" ? out.p2 : out.p1);
    }
    return out;
}

}  // namespace riskshare
