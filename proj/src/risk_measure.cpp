#include "riskshare/risk_measure.hpp"

#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskshare {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double layer_discrete(const Distortion& g, const LossModel& X, double lo, double hi) {
    const auto& d = X.as_discrete();
    const auto tails = X.tail_masses();
    double sum = 0.0;
    // S = 1 below the first atom
    double seg_lo = -kInf;
    double level = 1.0;
    for (std::size_t j = 0; j <= d.atoms.size(); ++j) {
        const double seg_hi = j < d.atoms.size() ? d.atoms[j] : kInf;
        const double a = std::max(lo, seg_lo);
        const double b = std::min(hi, seg_hi);
        if (b > a && level > 0.0) {
            if (!std::isfinite(b - a)) throw DivergenceError("layer integral diverges below the support");
            sum += g(level) * (b - a);
        }
        if (j < d.atoms.size()) {
            seg_lo = seg_hi;
            level = tails[j];
        }
    }
    return sum;
}

double layer_exponential(const Distortion& g, double rate, double lo, double hi) {
    double sum = 0.0;
    if (lo < 0.0) {
        const double b = std::min(hi, 0.0);
        if (!std::isfinite(lo)) throw DivergenceError("layer integral diverges below the support");
        sum += b - lo;  // g(1) = 1
    }
    const double a = std::max(lo, 0.0);
    if (hi > a) {
        const double p_hi = std::exp(-rate * a);
        const double p_lo = std::isfinite(hi) ? std::exp(-rate * hi) : 0.0;
        sum += g.integral_over_p(p_lo, p_hi) / rate;
    }
    return sum;
}

double layer_table(const Distortion& g, const EmpiricalQuantile& q, double lo, double hi) {
    const auto& pts = q.points;
    double sum = 0.0;
    const double vmin = pts.back().second;
    if (lo < vmin) {
        if (!std::isfinite(lo)) throw DivergenceError("layer integral diverges below the support");
        sum += std::min(hi, vmin) - lo;
    }
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double v0 = pts[k].second;
        const double v1 = pts[k + 1].second;
        if (!(v0 > v1)) continue;
        const double a = std::max(lo, v1);
        const double b = std::min(hi, v0);
        if (!(b > a)) continue;
        const double dp = pts[k + 1].first - pts[k].first;
        auto p_of = [&](double t) {
            return std::clamp(pts[k].first + dp * (v0 - t) / (v0 - v1), 0.0, 1.0);
        };
        sum += (v0 - v1) / dp * g.integral(p_of(b), p_of(a));
    }
    return sum;
}

}  // namespace

AgentSpec::AgentSpec(Distortion g, double a, double b, double c)
    : g_(std::move(g)), a_(a), b_(b), c_(c), s_(1.0 + b + c) {
    if (g_.concavity() != Concavity::Concave) throw DomainError("agent distortion must be concave");
    if (!(a_ >= 0.0)) throw DomainError("fixed cost a must be non-negative");
    if (!(b_ >= 0.0)) throw DomainError("proportional cost b must be non-negative");
    if (!std::isfinite(c_)) throw DomainError("expected-size cost c must be finite");
}

double layer_integral(const Distortion& g, const LossModel& X, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    if (X.is_discrete()) return layer_discrete(g, X, lo, hi);
    if (const auto* e = std::get_if<Exponential>(&X.variant())) {
        return layer_exponential(g, e->rate, lo, hi);
    }
    return layer_table(g, std::get<EmpiricalQuantile>(X.variant()), lo, hi);
}

double distorted_expectation(const Distortion& g, const LossModel& X) {
    if (X.is_discrete()) {
        const auto& d = X.as_discrete();
        const auto tails = X.tail_masses();
        double h = 0.0;
        double prev = 1.0;
        for (std::size_t j = 0; j < d.atoms.size(); ++j) {
            h += d.atoms[j] * (g(prev) - g(tails[j]));
            prev = tails[j];
        }
        return h;
    }
    const double x_lo = X.ess_inf();
    const double h = x_lo + layer_integral(g, X, x_lo, kInf);
    if (!std::isfinite(h)) throw DivergenceError("distorted expectation diverges in the upper tail");
    return h;
}

double distorted_expectation(const Distortion& g, const PiecewiseLinearMap& f, const LossModel& X) {
    if (!f.non_decreasing()) {
        throw DomainError("payout map must be non-decreasing; use a ladder representation");
    }
    if (X.is_discrete()) {
        const auto& d = X.as_discrete();
        const auto tails = X.tail_masses();
        double h = 0.0;
        double prev = 1.0;
        for (std::size_t j = 0; j < d.atoms.size(); ++j) {
            h += f(d.atoms[j]) * (g(prev) - g(tails[j]));
            prev = tails[j];
        }
        return h;
    }
    const double x_lo = X.ess_inf();
    double h = f(x_lo);
    for (const auto& piece : f.pieces()) {
        const double a = std::max(piece.lo, x_lo);
        if (!(piece.hi > a) || piece.slope == 0.0) continue;
        h += piece.slope * layer_integral(g, X, a, piece.hi);
    }
    if (!std::isfinite(h)) throw DivergenceError("distorted expectation diverges in the upper tail");
    return h;
}

double expectation(const PiecewiseLinearMap& f, const LossModel& X) {
    if (X.is_discrete()) {
        const auto& d = X.as_discrete();
        double e = 0.0;
        for (std::size_t j = 0; j < d.atoms.size(); ++j) e += d.probs[j] * f(d.atoms[j]);
        return e;
    }
    return distorted_expectation(Distortion::identity(), f, X);
}

double value_functional(const AgentSpec& agent, const PiecewiseLinearMap& f, const LossModel& X) {
    return (1.0 + agent.b()) * distorted_expectation(agent.g(), f, X) + agent.c() * expectation(f, X);
}

double tranche_integral(const Distortion& g, double b, double c, const PiecewiseLinearMap& f,
                        const LossModel& X) {
    if (X.ess_inf() < 0.0) throw DomainError("tranche integral requires a non-negative loss");
    if (std::abs(f(0.0)) > 1e-12) throw DomainError("tranche integral requires f(0) = 0");
    if (!f.non_decreasing()) throw DomainError("payout map must be non-decreasing");
    const Distortion id = Distortion::identity();
    double sum = 0.0;
    for (const auto& piece : f.pieces()) {
        const double a = std::max(piece.lo, 0.0);
        if (!(piece.hi > a) || piece.slope == 0.0) continue;
        sum += piece.slope * ((1.0 + b) * layer_integral(g, X, a, piece.hi) +
                              c * layer_integral(id, X, a, piece.hi));
    }
    return sum;
}

std::vector<RationalityEntry> rationality_check(const std::vector<AgentSpec>& agents,
                                                const Allocation& original,
                                                const Allocation& proposed, const LossModel& X) {
    if (original.size() != agents.size() || proposed.size() != agents.size()) {
        throw DomainError("allocation size does not match agent count");
    }
    std::vector<RationalityEntry> out;
    out.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        RationalityEntry e;
        e.h_original = distorted_expectation(agents[i].g(), original[i], X);
        e.v_proposed = value_functional(agents[i], proposed[i], X);
        e.margin = e.h_original - agents[i].a() - e.v_proposed;
        e.rational = e.margin >= -1e-12 * std::max(1.0, std::abs(e.h_original));
        out.push_back(e);
    }
    return out;
}

InsuranceRationality insurance_rationality(const Distortion& g_insurer, double b_insurer,
                                           const Distortion& g_buyer, double theta,
                                           const PiecewiseLinearMap& f, const LossModel& X) {
    InsuranceRationality r;
    r.premium = (1.0 + theta) * expectation(f, X);
    r.insurer_cost = (1.0 + b_insurer) * distorted_expectation(g_insurer, f, X);
    r.buyer_benefit = distorted_expectation(g_buyer, f, X);
    const double tol = 1e-12 * std::max(1.0, std::abs(r.premium));
    r.insurer_ok = r.premium >= r.insurer_cost - tol;
    r.buyer_ok = r.buyer_benefit >= r.premium - tol;
    return r;
}

}  // namespace riskshare
