#include "riskshare/load_curve.hpp"

#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>

namespace riskshare {

LoadCurve::LoadCurve(std::vector<LoadTerm> terms, double linear, double normalizer)
    : terms_(std::move(terms)), linear_(linear), normalizer_(std::abs(normalizer)) {
    if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_)) {
        throw DomainError("load curve normalizer must be finite and non-zero");
    }
}

double LoadCurve::operator()(double p) const {
    double sum = linear_ * p;
    for (const auto& t : terms_) sum += t.coef * t.g(p);
    return sum / normalizer_;
}

bool LoadCurve::is_piecewise_linear() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.g.is_piecewise_linear(); });
}

std::vector<double> LoadCurve::kinks() const {
    std::vector<double> out;
    for (const auto& t : terms_) {
        if (!t.g.is_piecewise_linear()) continue;
        const auto k = t.g.kinks();
        out.insert(out.end(), k.begin(), k.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double LoadCurve::abs_layer_bound(const LossModel& X, double lo, double hi) const {
    double sum = std::abs(linear_) * layer_integral(Distortion::identity(), X, lo, hi);
    for (const auto& t : terms_) sum += std::abs(t.coef) * layer_integral(t.g, X, lo, hi);
    return sum / normalizer_;
}

LoadCurve risk_load_curve(const AgentSpec& agent, double lambda, const std::optional<Distortion>& h) {
    if (!(lambda >= 0.0)) throw DomainError("multiplier must be non-negative");
    if (lambda > 0.0 && !h) throw DomainError("positive multiplier requires a constraint distortion");
    const double norm = agent.s() + lambda;
    if (std::abs(norm) <= 1e-12) {
        throw DomainError("risk-load normalizer 1 + b + c + lambda vanishes; use delta_family_solve");
    }
    std::vector<LoadTerm> terms{{1.0 + agent.b(), agent.g()}};
    if (lambda > 0.0) terms.push_back({lambda, *h});
    return {std::move(terms), agent.c(), norm};
}

}  // namespace riskshare
