#include "riskshare/ladder.hpp"

#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace riskshare {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-12;

}  // namespace

Ladder::Ladder(std::vector<double> breakpoints, std::vector<std::vector<double>> weights,
               std::vector<double> offsets)
    : breakpoints_(std::move(breakpoints)), weights_(std::move(weights)), offsets_(std::move(offsets)) {
    if (breakpoints_.size() < 2 || weights_.size() + 1 != breakpoints_.size()) {
        throw DomainError("ladder needs K+1 breakpoints for K weight rows");
    }
    if (breakpoints_.front() != 0.0) throw DomainError("ladder must start at 0");
    for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
        if (!(breakpoints_[k + 1] > breakpoints_[k])) {
            throw DomainError("ladder breakpoints must be strictly increasing");
        }
    }
    const std::size_t n = weights_.front().size();
    if (n == 0) throw DomainError("ladder needs at least one agent");
    if (offsets_.empty()) offsets_.assign(n, 0.0);
    if (offsets_.size() != n) throw DomainError("ladder offsets size mismatch");
    for (auto& row : weights_) {
        if (row.size() != n) throw DomainError("ladder weight rows must have one entry per agent");
        double total = 0.0;
        for (double& w : row) {
            if (w < -kTol || w > 1.0 + kTol) throw DomainError("ladder weights must lie in [0, 1]");
            w = std::clamp(w, 0.0, 1.0);
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw DomainError("ladder weights must sum to 1");
    }
    const double off = std::accumulate(offsets_.begin(), offsets_.end(), 0.0);
    if (std::abs(off) > 1e-12 * std::max(1.0, std::abs(offsets_.front()))) {
        throw DomainError("ladder offsets must sum to 0");
    }
    canonicalize();
}

Ladder Ladder::single_owner(std::size_t n, std::size_t owner) {
    if (owner >= n) throw DomainError("owner index out of range");
    std::vector<double> w(n, 0.0);
    w[owner] = 1.0;
    return Ladder({0.0, kInf}, {w});
}

void Ladder::canonicalize() {
    std::vector<double> bp{breakpoints_.front()};
    std::vector<std::vector<double>> w;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (!w.empty() && w.back() == weights_[k]) {
            bp.back() = breakpoints_[k + 1];
        } else {
            w.push_back(weights_[k]);
            bp.push_back(breakpoints_[k + 1]);
        }
    }
    breakpoints_ = std::move(bp);
    weights_ = std::move(w);
}

std::size_t Ladder::layer_at(double x) const {
    if (x < 0.0) throw DomainError("ladder evaluated at negative loss");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    const auto k = static_cast<std::size_t>(it - breakpoints_.begin());
    return std::min(k == 0 ? 0 : k - 1, weights_.size() - 1);
}

double Ladder::apply(std::size_t i, double x) const {
    if (i >= agents()) throw DomainError("agent index out of range");
    if (x < 0.0) throw DomainError("ladder evaluated at negative loss");
    double sum = offsets_[i];
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double lo = breakpoints_[k];
        if (x <= lo) break;
        const double hi = (k + 1 == weights_.size()) ? kInf : breakpoints_[k + 1];
        sum += weights_[k][i] * (std::min(x, hi) - lo);
    }
    return sum;
}

double Ladder::marginal(std::size_t i, double x) const {
    if (i >= agents()) throw DomainError("agent index out of range");
    return weights_[layer_at(x)][i];
}

PiecewiseLinearMap Ladder::component(std::size_t i) const {
    if (i >= agents()) throw DomainError("agent index out of range");
    std::vector<double> knots;
    std::vector<double> values;
    double acc = offsets_[i];
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        knots.push_back(breakpoints_[k]);
        values.push_back(acc);
        if (k + 1 < weights_.size()) acc += weights_[k][i] * (breakpoints_[k + 1] - breakpoints_[k]);
    }
    return {std::move(knots), std::move(values), weights_.front()[i], weights_.back()[i]};
}

Allocation Ladder::components() const {
    Allocation out;
    for (std::size_t i = 0; i < agents(); ++i) out.push_back(component(i));
    return out;
}

Ladder Ladder::shift(const std::vector<double>& deltas) const {
    if (deltas.size() != agents()) throw DomainError("shift size mismatch");
    const double total = std::accumulate(deltas.begin(), deltas.end(), 0.0);
    if (std::abs(total) > 1e-12) throw DomainError("side payments must sum to zero");
    Ladder out = *this;
    for (std::size_t i = 0; i < agents(); ++i) out.offsets_[i] += deltas[i];
    return out;
}

std::vector<std::vector<double>> Ladder::payouts(const std::vector<double>& atoms) const {
    std::vector<std::vector<double>> out(agents(), std::vector<double>(atoms.size()));
    for (std::size_t i = 0; i < agents(); ++i) {
        for (std::size_t j = 0; j < atoms.size(); ++j) out[i][j] = apply(i, atoms[j]);
    }
    return out;
}

std::vector<double> Ladder::switch_points(std::size_t i) const {
    std::vector<double> out;
    for (std::size_t k = 1; k < weights_.size(); ++k) {
        if (weights_[k][i] != weights_[k - 1][i]) out.push_back(breakpoints_[k]);
    }
    return out;
}

Ladder mix(const Ladder& a, const Ladder& b, double tau) {
    if (a.agents() != b.agents()) throw DomainError("cannot mix ladders with different agent counts");
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("mixing weight must lie in [0, 1]");
    std::vector<double> bp;
    for (const auto* l : {&a, &b}) {
        for (double t : l->breakpoints()) {
            if (std::isfinite(t)) bp.push_back(t);
        }
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    std::vector<std::vector<double>> w;
    for (double t : bp) {
        const auto& wa = a.weights()[a.layer_at(t)];
        const auto& wb = b.weights()[b.layer_at(t)];
        std::vector<double> row(a.agents());
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = tau * wa[i] + (1.0 - tau) * wb[i];
        w.push_back(std::move(row));
    }
    bp.push_back(kInf);
    std::vector<double> off(a.agents());
    for (std::size_t i = 0; i < off.size(); ++i) off[i] = tau * a.offsets()[i] + (1.0 - tau) * b.offsets()[i];
    return {std::move(bp), std::move(w), std::move(off)};
}

bool comonotone_check(const std::vector<std::vector<double>>& values) {
    for (std::size_t r = 0; r < values.size(); ++r) {
        for (std::size_t q = r + 1; q < values.size(); ++q) {
            const auto& y = values[r];
            const auto& z = values[q];
            if (y.size() != z.size()) return false;
            for (std::size_t a = 0; a < y.size(); ++a) {
                for (std::size_t b = a + 1; b < y.size(); ++b) {
                    if ((y[a] - y[b]) * (z[a] - z[b]) < -kTol) return false;
                }
            }
        }
    }
    return true;
}

SidePayments side_payments(const std::vector<AgentSpec>& agents, const Ladder& ladder,
                           const Allocation& original, const LossModel& X) {
    const std::size_t n = agents.size();
    if (ladder.agents() != n) throw DomainError("ladder agent count mismatch");
    const auto proposed = ladder.components();
    const auto entries = rationality_check(agents, original, proposed, X);

    const bool all_pos = std::all_of(agents.begin(), agents.end(), [](const auto& a) { return a.s() > 0.0; });
    const bool all_neg = std::all_of(agents.begin(), agents.end(), [](const auto& a) { return a.s() < 0.0; });
    if (!all_pos && !all_neg) {
        throw DomainError("side payments need 1 + b_i + c_i of one strict sign for all agents");
    }

    SidePayments out;
    out.margins.reserve(n);
    std::vector<double> bound(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.margins.push_back(entries[i].margin);
        // s_i > 0: delta_i <= m_i / s_i; s_i < 0: delta_i >= m_i / s_i
        bound[i] = entries[i].margin / agents[i].s();
        total += bound[i];
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(total));
    out.feasible = all_pos ? total >= -tol : total <= tol;
    if (!out.feasible) {
        out.reason = "participation constraints cannot be met by any side payments";
        return out;
    }
    out.deltas.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.deltas[i] = bound[i] - total / static_cast<double>(n);
    // remove rounding drift so the payments sum to zero exactly
    const double drift = std::accumulate(out.deltas.begin(), out.deltas.end(), 0.0);
    out.deltas.back() -= drift;
    return out;
}

}  // namespace riskshare
