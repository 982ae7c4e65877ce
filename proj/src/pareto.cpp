#include "riskshare/pareto.hpp"

#include "numeric.hpp"
#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskshare {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroS = 1e-12;

// Bisection down to adjacent doubles. Requires sign(f(lo)) != sign(f(hi)).
template <typename F>
double bisect(const F& f, double lo, double hi) {
    const bool lo_neg = f(lo) < 0.0;
    for (int it = 0; it < 1200; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double v = f(mid);
        if (v == 0.0) return mid;
        if ((v < 0.0) == lo_neg) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

void sort_unique(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<double> analytic_grid(std::size_t n, const std::vector<double>& extra) {
    std::vector<double> grid;
    grid.reserve(n + 1001 + extra.size());
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
    // resolve crossings deep in the tail, where t = S^{-1}(p) is large
    for (int k = 1; k <= 1000; ++k) grid.push_back(std::ldexp(1.0, -k));
    grid.insert(grid.end(), extra.begin(), extra.end());
    sort_unique(grid);
    return grid;
}

// Loss levels where the argmin may change: 0, model breakpoints, and the
// critical probabilities mapped through the quantile.
std::vector<double> t_points(const std::vector<LoadCurve>& curves, const LossModel& X, const SolveOptions& opt) {
    if (X.ess_inf() < 0.0) throw DomainError("ladder allocations require a non-negative loss");
    std::vector<double> t{0.0};
    for (double b : X.breakpoints()) {
        if (b > 0.0 && std::isfinite(b)) t.push_back(b);
    }
    if (!X.is_discrete()) {
        for (double p : critical_probabilities(curves, opt.grid_size)) {
            const double q = X.quantile(p);
            if (q > 0.0 && std::isfinite(q)) t.push_back(q);
        }
    }
    sort_unique(t);
    // drop near-duplicates that would create empty layers
    std::vector<double> out{t.front()};
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (t[k] - out.back() > 1e-15 * std::max(1.0, std::abs(t[k]))) out.push_back(t[k]);
    }
    return out;
}

std::vector<std::size_t> argmin_set(const std::vector<LoadCurve>& curves, double p) {
    std::vector<double> q(curves.size());
    double m = kInf;
    for (std::size_t k = 0; k < curves.size(); ++k) {
        q[k] = curves[k](p);
        m = std::min(m, q[k]);
    }
    // relative: near p = 0 every curve is O(p) and an absolute floor would tie them all
    double scale = p;
    for (double v : q) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < curves.size(); ++k) {
        if (q[k] <= m + tol) out.push_back(k);
    }
    return out;
}

double min_curve(const std::vector<LoadCurve>& curves, double p) {
    double m = kInf;
    for (const auto& c : curves) m = std::min(m, c(p));
    return m;
}

std::vector<double> tie_weights(const std::vector<std::size_t>& tied, std::size_t n, TieRule rule) {
    std::vector<double> w(n, 0.0);
    switch (rule) {
        case TieRule::Lowest: w[tied.front()] = 1.0; break;
        case TieRule::Highest: w[tied.back()] = 1.0; break;
        case TieRule::Split:
            for (auto k : tied) w[k] = 1.0 / static_cast<double>(tied.size());
            break;
    }
    return w;
}

// Survival value representing the open layer [lo, hi).
double representative_survival(const LossModel& X, double lo, double hi) {
    if (X.is_discrete()) return X.survival(lo);
    if (std::isinf(hi)) return X.survival(lo + std::max(1.0, lo));
    return X.survival(0.5 * (lo + hi));
}

}  // namespace

Existence existence_check(const std::vector<AgentSpec>& agents) {
    bool pos = false;
    bool neg = false;
    bool zero = false;
    for (const auto& a : agents) {
        const double s = a.s();
        if (std::abs(s) <= kZeroS) {
            zero = true;
        } else if (s > 0.0) {
            pos = true;
        } else {
            neg = true;
        }
    }
    if (!pos && !neg) return Existence::DegenerateAllZero;
    if ((pos && neg) || zero) return Existence::Unsolvable;
    return Existence::Solvable;
}

std::vector<double> critical_probabilities(const std::vector<LoadCurve>& curves, std::size_t grid_size) {
    std::vector<double> kinks;
    bool pwl = true;
    for (const auto& c : curves) {
        const auto k = c.kinks();
        kinks.insert(kinks.end(), k.begin(), k.end());
        pwl = pwl && c.is_piecewise_linear();
    }
    std::vector<double> out = kinks;
    if (curves.size() < 2) {
        sort_unique(out);
        return out;
    }
    std::vector<double> grid;
    if (pwl) {
        grid = kinks;
        grid.push_back(0.0);
        grid.push_back(1.0);
        sort_unique(grid);
    } else {
        if (grid_size < 2) throw DomainError("grid size must be at least 2");
        grid = analytic_grid(grid_size, kinks);
    }
    std::vector<double> values(curves.size() * grid.size());
    for (std::size_t k = 0; k < curves.size(); ++k) {
        for (std::size_t g = 0; g < grid.size(); ++g) values[k * grid.size() + g] = curves[k](grid[g]);
    }
    for (std::size_t a = 0; a < curves.size(); ++a) {
        for (std::size_t b = a + 1; b < curves.size(); ++b) {
            auto diff = [&](double p) { return curves[a](p) - curves[b](p); };
            // scan with the last point of nonzero difference as the left bracket
            std::size_t last = grid.size();
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double d = values[a * grid.size() + g] - values[b * grid.size() + g];
                if (d == 0.0) continue;
                if (last < grid.size()) {
                    const double dl = values[a * grid.size() + last] - values[b * grid.size() + last];
                    if ((dl < 0.0) != (d < 0.0)) {
                        if (pwl && g == last + 1) {
                            // both curves are linear on [grid[last], grid[g]]
                            const double lo = grid[last];
                            const double hi = grid[g];
                            out.push_back(lo + (hi - lo) * dl / (dl - d));
                        } else {
                            out.push_back(bisect(diff, grid[last], grid[g]));
                        }
                    }
                }
                last = g;
            }
        }
    }
    sort_unique(out);
    std::vector<double> interior;
    for (double p : out) {
        if (p > 0.0 && p < 1.0) interior.push_back(p);
    }
    return interior;
}

LadderBuild build_ladder(const std::vector<LoadCurve>& curves, const LossModel& X, const SolveOptions& opt) {
    const std::size_t n = curves.size();
    if (n == 0) throw DomainError("no agents");
    auto t = t_points(curves, X, opt);
    t.push_back(kInf);
    const std::size_t K = t.size() - 1;

    std::vector<std::vector<double>> w(K);
    std::vector<int> degenerate(K, 0);  // -1: S = 0 beyond the support, +1: S = 1 below it
    std::vector<Segment> ties;
    for (std::size_t k = 0; k < K; ++k) {
        const double s = representative_survival(X, t[k], t[k + 1]);
        if (s <= 0.0) {
            degenerate[k] = -1;
            continue;
        }
        if (s >= 1.0) {
            degenerate[k] = 1;
            continue;
        }
        const auto tied = argmin_set(curves, s);
        w[k] = tie_weights(tied, n, opt.tie);
        if (tied.size() > 1) {
            if (!ties.empty() && ties.back().hi == t[k]) {
                ties.back().hi = t[k + 1];
            } else {
                ties.push_back({t[k], t[k + 1]});
            }
        }
    }
    // Layers the loss never reaches (S = 0) cost nothing. Layers it always exceeds
    // (S = 1) cost Q(1), which is common to normalized curves but not in general.
    // Tied layers copy a neighbour so no spurious switch appears.
    const auto top = argmin_set(curves, 1.0);
    std::vector<double> fallback = tie_weights(top, n, opt.tie);
    auto within_top = [&](const std::vector<double>& row) {
        for (std::size_t i = 0; i < n; ++i) {
            if (row[i] > 0.0 && std::find(top.begin(), top.end(), i) == top.end()) return false;
        }
        return true;
    };
    for (std::size_t k = K; k-- > 0;) {
        if (degenerate[k] != 1) continue;
        const bool copy = top.size() > 1 && k + 1 < K && !w[k + 1].empty() && within_top(w[k + 1]);
        w[k] = copy ? w[k + 1] : fallback;
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (degenerate[k] == -1) {
            if (k > 0 && !w[k - 1].empty()) {
                w[k] = w[k - 1];
            } else {
                std::size_t j = k + 1;
                while (j < K && w[j].empty()) ++j;
                w[k] = j < K ? w[j] : fallback;
            }
        }
    }
    return {Ladder(std::move(t), std::move(w)), std::move(ties)};
}

double envelope_integral(const std::vector<LoadCurve>& curves, const LossModel& X, const SolveOptions& opt) {
    const auto t = t_points(curves, X, opt);
    auto integrand = [&](double x) {
        const double s = X.survival(x);
        return s <= 0.0 ? 0.0 : min_curve(curves, s);
    };
    double sum = 0.0;
    if (X.is_discrete()) {
        for (std::size_t k = 0; k + 1 < t.size(); ++k) sum += (t[k + 1] - t[k]) * integrand(t[k]);
        return sum;
    }
    constexpr double kTol = 1e-12;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        sum += detail::adaptive_simpson_split(integrand, t[k], t[k + 1], kTol, 8);
    }
    if (std::isfinite(X.ess_sup())) return sum;
    auto tail_bound = [&](double a) {
        double b = 0.0;
        for (const auto& c : curves) b = std::max(b, c.abs_layer_bound(X, a, kInf));
        return b;
    };
    double a = t.back();
    double len = 1.0;
    for (int it = 0; it < 200 && tail_bound(a) >= kTol / 10.0; ++it) {
        sum += detail::adaptive_simpson_split(integrand, a, a + len, kTol, 8);
        a += len;
        len *= 2.0;
    }
    return sum;
}

SolveReport evaluate_ladder(const std::vector<AgentSpec>& agents, const Ladder& ladder, const LossModel& X) {
    if (ladder.agents() != agents.size()) throw DomainError("ladder agent count mismatch");
    SolveReport r;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const auto f = ladder.component(i);
        AgentOutcome o;
        o.distorted = distorted_expectation(agents[i].g(), f, X);
        o.mean = expectation(f, X);
        o.value = (1.0 + agents[i].b()) * o.distorted + agents[i].c() * o.mean;
        const double s = std::abs(agents[i].s());
        if (s > kZeroS) r.objective += o.value / s;
        r.agents.push_back(o);
    }
    return r;
}

std::pair<Ladder, SolveReport> pareto_solve(const std::vector<AgentSpec>& agents, const LossModel& X,
                                            const SolveOptions& opt) {
    if (agents.empty()) throw DomainError("at least one agent is required");
    switch (existence_check(agents)) {
        case Existence::Unsolvable:
            throw UnsolvableError("no Pareto optimal allocation exists: the 1 + b_i + c_i do not share a strict sign");
        case Existence::DegenerateAllZero:
            if (agents.size() == 2) {
                throw DomainError("all 1 + b_i + c_i vanish; use delta_family_solve");
            }
            throw DomainError("all 1 + b_i + c_i vanish; only the two-agent case is supported");
        case Existence::Solvable: break;
    }
    std::vector<LoadCurve> curves;
    for (const auto& a : agents) curves.push_back(risk_load_curve(a));
    auto built = build_ladder(curves, X, opt);
    SolveReport report = evaluate_ladder(agents, built.ladder, X);
    report.envelope = envelope_integral(curves, X, opt);
    report.ties = std::move(built.ties);
    return {std::move(built.ladder), std::move(report)};
}

double Hyperplane::residual(const std::vector<double>& values) const {
    if (values.size() != coefficients.size()) throw DomainError("hyperplane dimension mismatch");
    double sum = -constant;
    for (std::size_t i = 0; i < values.size(); ++i) sum += coefficients[i] * values[i];
    return sum;
}

bool Hyperplane::contains(const std::vector<double>& values, double tol) const {
    return std::abs(residual(values)) <= tol * std::max(1.0, std::abs(constant));
}

Hyperplane hyperplane(const std::vector<AgentSpec>& agents, const SolveReport& report) {
    if (existence_check(agents) != Existence::Solvable) throw DomainError("hyperplane needs a solvable configuration");
    if (report.agents.size() != agents.size()) throw DomainError("report agent count mismatch");
    Hyperplane h;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        h.coefficients.push_back(1.0 / agents[i].s());
        h.constant += report.agents[i].value / agents[i].s();
    }
    return h;
}

Ladder delta_family_solve(const Distortion& g1, const Distortion& g2, double b1, double b2, double delta,
                          const LossModel& X, TieRule tie) {
    if (!(b1 >= 0.0) || !(b2 >= 0.0)) throw DomainError("b must be non-negative");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("delta must be finite and non-negative");
    std::vector<LoadCurve> curves{LoadCurve({{1.0, g1}}, -1.0, 1.0), LoadCurve({{delta, g2}}, -delta, 1.0)};
    SolveOptions opt;
    opt.tie = tie;
    return build_ladder(curves, X, opt).ladder;
}

DeductibleResult deductible_two_agent(const Distortion& g1, const Distortion& g2, double theta, double b1,
                                      const LossModel& X) {
    if (!(theta > b1) || !(b1 >= 0.0)) throw DomainError("deductible form needs theta > b1 >= 0");
    if (g1.concavity() != Concavity::Concave || g2.concavity() != Concavity::Concave) throw DomainError("distortions must be concave");
    if (std::holds_alternative<Identity>(g2.family()) || g2(0.5) <= 0.5) {
        throw DomainError("buyer distortion must differ from the identity");
    }
    const double kappa = (theta - b1) / (theta * (1.0 + b1));
    const double s1 = g2.slope_left(1.0) - 1.0;
    const double r1 = s1 != 0.0 ? (g1.slope_left(1.0) - 1.0) / s1 : 1.0;
    auto r = [&](double p) { return p >= 1.0 ? r1 : (g1(p) - p) / (g2(p) - p); };

    constexpr std::size_t kGrid = 2048;
    double prev = r(1.0 / kGrid);
    for (std::size_t i = 2; i <= kGrid; ++i) {
        const double cur = r(static_cast<double>(i) / kGrid);
        if (cur < prev - 1e-9 * std::max(1.0, std::abs(prev))) {
            throw DomainError("ratio (g1 - p)/(g2 - p) is not non-decreasing; use pareto_solve");
        }
        prev = cur;
    }

    DeductibleResult out;
    if (r1 <= kappa) {
        out.kind = DeductibleResult::Kind::Full;
        out.d = 0.0;
        out.p_star = 1.0;
        return out;
    }
    out.kind = DeductibleResult::Kind::Zero;
    out.d = kInf;
    out.p_star = 0.0;
    if (X.is_discrete()) {
        const auto& d = X.as_discrete();
        const auto tails = X.tail_masses();
        for (std::size_t j = 0; j < tails.size(); ++j) {
            if (tails[j] > 0.0 && tails[j] < 1.0 && r(tails[j]) <= kappa) {
                out.kind = DeductibleResult::Kind::Deductible;
                out.d = d.atoms[j];
                out.p_star = tails[j];
                break;
            }
        }
        return out;
    }
    const double g1s = g1.slope_right(0.0);
    const double g2s = g2.slope_right(0.0);
    const double r0 = (std::isfinite(g1s) && std::isfinite(g2s)) ? (g1s - 1.0) / (g2s - 1.0) : r(1e-300);
    if (r0 > kappa) return out;
    const double p_star = bisect([&](double p) { return p <= 0.0 ? r0 - kappa - 1e-300 : r(p) - kappa; }, 0.0, 1.0);
    out.kind = DeductibleResult::Kind::Deductible;
    out.p_star = p_star;
    out.d = X.quantile(p_star);
    return out;
}

}  // namespace riskshare
