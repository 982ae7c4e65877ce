#include "simplex.hpp"

#include "riskshare/errors.hpp"

#include <cmath>
#include <limits>

namespace riskshare::detail {

namespace {

struct Tableau {
    std::vector<std::vector<double>> a;  // m rows, width = vars + 1 (rhs last)
    std::vector<std::size_t> basis;
    std::size_t vars = 0;

    void pivot(std::size_t r, std::size_t col) {
        const double p = a[r][col];
        for (double& v : a[r]) v /= p;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r || a[i][col] == 0.0) continue;
            const double f = a[i][col];
            for (std::size_t j = 0; j <= vars; ++j) a[i][j] -= f * a[r][j];
        }
        basis[r] = col;
    }

    // Minimizes cost over columns < allowed; returns false if unbounded.
    bool optimize(const std::vector<double>& cost, std::size_t allowed, double tol) {
        for (int iter = 0; iter < 100000; ++iter) {
            // reduced costs
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                double rc = cost[j];
                for (std::size_t i = 0; i < a.size(); ++i) rc -= cost[basis[i]] * a[i][j];
                if (rc < -tol) {
                    enter = j;
                    break;  // Bland: first improving column
                }
            }
            if (enter == allowed) return true;
            std::size_t leave = a.size();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (a[i][enter] > tol) {
                    const double ratio = a[i][vars] / a[i][enter];
                    if (ratio < best - tol || (ratio <= best + tol && leave < a.size() && basis[i] < basis[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == a.size()) return false;
            pivot(leave, enter);
        }
        throw DivergenceError("simplex iteration limit reached");
    }
};

}  // namespace

std::optional<std::vector<double>> simplex_minimize(const std::vector<double>& c, const std::vector<LinearRow>& rows,
                                                    double tol) {
    const std::size_t n = c.size();
    std::size_t slacks = 0;
    for (const auto& r : rows) {
        if (r.coef.size() != n) throw DomainError("linear row width mismatch");
        if (!r.equality) ++slacks;
    }
    const std::size_t m = rows.size();
    Tableau t;
    t.vars = n + slacks + m;  // structural, slack, artificial
    t.a.assign(m, std::vector<double>(t.vars + 1, 0.0));
    t.basis.resize(m);
    std::size_t s = 0;
    for (std::size_t i = 0; i < m; ++i) {
        auto& row = t.a[i];
        for (std::size_t j = 0; j < n; ++j) row[j] = rows[i].coef[j];
        if (!rows[i].equality) row[n + s++] = 1.0;
        row[t.vars] = rows[i].rhs;
        if (row[t.vars] < 0.0) {
            for (double& v : row) v = -v;
        }
        row[n + slacks + i] = 1.0;
        t.basis[i] = n + slacks + i;
    }
    std::vector<double> phase1(t.vars, 0.0);
    for (std::size_t i = 0; i < m; ++i) phase1[n + slacks + i] = 1.0;
    t.optimize(phase1, t.vars, tol);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] >= n + slacks) infeas += t.a[i][t.vars];
    }
    if (infeas > 1e-8) return std::nullopt;
    // drive remaining (zero-level) artificials out of the basis
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] < n + slacks) continue;
        for (std::size_t j = 0; j < n + slacks; ++j) {
            if (std::abs(t.a[i][j]) > tol) {
                t.pivot(i, j);
                break;
            }
        }
    }
    std::vector<double> phase2(t.vars, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
    if (!t.optimize(phase2, n + slacks, tol)) throw DivergenceError("linear program is unbounded");
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] < n) x[t.basis[i]] = t.a[i][t.vars];
    }
    return x;
}

}  // namespace riskshare::detail
