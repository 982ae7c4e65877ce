#include "riskshare/oracle.hpp"

#include "riskshare/errors.hpp"
#include "riskshare/ladder.hpp"
#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace riskshare {

namespace {

// Upper-quantile integral q -> integral_0^q S^{-1}(p) dp of a finite law.
class TailIntegral {
public:
    TailIntegral(const std::vector<double>& values, const std::vector<double>& probs) {
        std::vector<std::size_t> idx(values.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] > values[b]; });
        for (auto k : idx) {
            if (probs[k] <= 0.0) continue;
            v_.push_back(values[k]);
            p_.push_back(probs[k]);
        }
    }

    double operator()(double q) const {
        double acc = 0.0;
        double used = 0.0;
        for (std::size_t k = 0; k < v_.size() && used < q; ++k) {
            const double take = std::min(p_[k], q - used);
            acc += take * v_[k];
            used += take;
        }
        return acc;
    }

    [[nodiscard]] std::vector<double> knots() const {
        std::vector<double> out{0.0};
        double c = 0.0;
        for (double p : p_) out.push_back(c += p);
        return out;
    }

private:
    std::vector<double> v_;
    std::vector<double> p_;
};

double agent_value(const AgentSpec& a, const std::vector<double>& y, const std::vector<double>& probs) {
    double mean = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) mean += y[k] * probs[k];
    return (1.0 + a.b()) * choquet_discrete(a.g(), y, probs) + a.c() * mean;
}

}  // namespace

double choquet_discrete(const Distortion& g, const std::vector<double>& values, const std::vector<double>& probs) {
    if (values.size() != probs.size()) throw DomainError("values and probabilities differ in length");
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] > values[b]; });
    double acc = 0.0;
    double mass = 0.0;
    double g_prev = 0.0;
    for (auto k : idx) {
        mass = std::min(1.0, mass + probs[k]);
        const double g_now = g(mass);
        acc += values[k] * (g_now - g_prev);
        g_prev = g_now;
    }
    return acc;
}

BruteForceResult brute_force_discrete(const DiscreteInstance& inst) {
    const auto& d = inst.X.as_discrete();
    const std::size_t m = d.atoms.size();
    const std::size_t n = inst.agents.size();
    if (n == 0) throw DomainError("no agents");
    if (m > inst.max_atoms || n > inst.max_agents) throw DomainError("instance exceeds enumeration caps");
    for (const auto& a : inst.agents) {
        if (std::abs(a.s()) <= 1e-12) throw DomainError("objective weights 1/|s_i| need s_i != 0");
    }
    BruteForceResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> assign(m > 0 ? m - 1 : 0, 0);
    std::vector<std::vector<double>> pay(n, std::vector<double>(m));
    while (true) {
        for (auto& row : pay) std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            pay[0][k] = d.atoms[0];
            for (std::size_t j = 1; j <= k; ++j) pay[assign[j - 1]][k] += d.atoms[j] - d.atoms[j - 1];
        }
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            obj += agent_value(inst.agents[i], pay[i], d.probs) / std::abs(inst.agents[i].s());
        }
        if (obj < best.objective) {
            best.objective = obj;
            best.assignment = assign;
            best.payouts = pay;
        }
        // next assignment in lexicographic order (last position fastest)
        std::size_t pos = assign.size();
        while (pos > 0) {
            --pos;
            if (++assign[pos] < n) break;
            assign[pos] = 0;
            if (pos == 0) return best;
        }
        if (assign.empty()) return best;
    }
}

ConvexOrderResult convex_order_check(const LossModel& Y, const LossModel& Z) {
    const auto& y = Y.as_discrete();
    const auto& z = Z.as_discrete();
    const TailIntegral iy(y.atoms, y.probs);
    const TailIntegral iz(z.atoms, z.probs);
    auto grid = iy.knots();
    const auto kz = iz.knots();
    grid.insert(grid.end(), kz.begin(), kz.end());
    std::sort(grid.begin(), grid.end());
    double scale = 1.0;
    for (double a : y.atoms) scale = std::max(scale, std::abs(a));
    for (double a : z.atoms) scale = std::max(scale, std::abs(a));
    const double tol = 1e-12 * scale;

    ConvexOrderResult r;
    const bool equal_means = std::abs(Y.mean() - Z.mean()) <= tol;
    r.y_le_z = equal_means;
    r.z_le_y = equal_means;
    for (double q : grid) {
        q = std::min(q, 1.0);
        const double a = iy(q);
        const double b = iz(q);
        if (a > b + tol) r.y_le_z = false;
        if (b > a + tol) r.z_le_y = false;
    }
    r.verdict = r.y_le_z ? "ordered" : (r.z_le_y ? "reversed" : "incomparable");
    return r;
}

DominanceReport comonotone_dominance_check(const std::vector<double>& x, const std::vector<double>& probs,
                                           const std::vector<std::vector<double>>& payouts,
                                           const std::vector<AgentSpec>& agents,
                                           const std::vector<std::optional<Distortion>>& constraints) {
    const std::size_t n = payouts.size();
    const std::size_t m = x.size();
    if (n == 0 || agents.size() != n) throw DomainError("one payout row per agent is required");
    if (probs.size() != m) throw DomainError("one probability per state is required");
    if (!constraints.empty() && constraints.size() != n) throw DomainError("one optional constraint per agent");
    double scale = 1.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < m; ++k) {
        double sum = 0.0;
        for (const auto& row : payouts) {
            if (row.size() != m) throw DomainError("payout row length mismatch");
            sum += row[k];
        }
        if (std::abs(sum - x[k]) > 1e-12 * scale) throw DomainError("payouts do not sum to X statewise");
    }

    DominanceReport rep;
    rep.already_comonotone = comonotone_check(payouts);
    if (rep.already_comonotone) {
        rep.rearranged = payouts;
    } else {
        // distinct loss levels x_(0) < ... < x_(L-1) and their masses
        std::vector<double> levels = x;
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        const std::size_t L = levels.size();
        std::vector<double> mass(L, 0.0);
        std::vector<std::size_t> level_of(m);
        for (std::size_t k = 0; k < m; ++k) {
            level_of[k] = static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), x[k]) - levels.begin());
            mass[level_of[k]] += probs[k];
        }
        std::vector<double> upper(L + 1, 0.0);  // upper[k] = P(X >= x_(k))
        for (std::size_t k = L; k-- > 0;) upper[k] = upper[k + 1] + mass[k];

        // f_i(x_(l)) = u_i - v_i + sum_{j=1..l} D_ij with D_ij >= 0
        const std::size_t width = L + 1;
        const std::size_t nv = n * width;
        auto u = [&](std::size_t i) { return i * width; };
        auto v = [&](std::size_t i) { return i * width + 1; };
        auto inc = [&](std::size_t i, std::size_t j) { return i * width + 1 + j; };
        std::vector<detail::LinearRow> rows;
        {
            detail::LinearRow r{std::vector<double>(nv, 0.0), levels[0], true};
            for (std::size_t i = 0; i < n; ++i) {
                r.coef[u(i)] = 1.0;
                r.coef[v(i)] = -1.0;
            }
            rows.push_back(r);
        }
        for (std::size_t j = 1; j < L; ++j) {
            detail::LinearRow r{std::vector<double>(nv, 0.0), levels[j] - levels[j - 1], true};
            for (std::size_t i = 0; i < n; ++i) r.coef[inc(i, j)] = 1.0;
            rows.push_back(r);
        }
        std::vector<double> cost(nv, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const TailIntegral phi(payouts[i], probs);
            // tail sums T_i(k) = sum_{l >= k} P(X = x_(l)) f_i(x_(l)); k = 0 is the mean
            for (std::size_t k = 0; k < L; ++k) {
                detail::LinearRow r{std::vector<double>(nv, 0.0), phi(upper[k]), k == 0};
                r.coef[u(i)] = upper[k];
                r.coef[v(i)] = -upper[k];
                for (std::size_t j = 1; j < L; ++j) r.coef[inc(i, j)] = upper[std::max(j, k)];
                if (k > 0) {
                    for (std::size_t c = 0; c < nv; ++c) cost[c] += r.coef[c];
                }
                rows.push_back(std::move(r));
            }
        }
        const auto sol = detail::simplex_minimize(cost, rows);
        if (!sol) throw DivergenceError("comonotone improvement LP reported infeasibility");
        std::vector<std::vector<double>> f(n, std::vector<double>(L));
        for (std::size_t i = 0; i < n; ++i) {
            double acc = (*sol)[u(i)] - (*sol)[v(i)];
            for (std::size_t l = 0; l < L; ++l) {
                if (l > 0) acc += (*sol)[inc(i, l)];
                f[i][l] = acc;
            }
        }
        rep.rearranged.assign(n, std::vector<double>(m));
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t i = 0; i < n; ++i) rep.rearranged[i][k] = f[i][level_of[k]];
        }
    }
    rep.comonotone = comonotone_check(rep.rearranged);
    rep.dominates = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < n; ++i) {
        rep.v_original.push_back(agent_value(agents[i], payouts[i], probs));
        rep.v_rearranged.push_back(agent_value(agents[i], rep.rearranged[i], probs));
        if (rep.v_rearranged[i] > rep.v_original[i] + 1e-10) rep.dominates = false;
        if (!constraints.empty() && constraints[i]) {
            rep.h_original.push_back(choquet_discrete(*constraints[i], payouts[i], probs));
            rep.h_rearranged.push_back(choquet_discrete(*constraints[i], rep.rearranged[i], probs));
            if (rep.h_rearranged[i] > rep.h_original[i] + 1e-10) rep.dominates = false;
        } else {
            rep.h_original.push_back(nan);
            rep.h_rearranged.push_back(nan);
        }
    }
    return rep;
}

}  // namespace riskshare
