#pragma once

#include <cmath>
#include <functional>

namespace riskshare::detail {

// Adaptive Simpson quadrature with Richardson correction.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 50) {
    struct Step {
        static double run(const F& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
                return left + right + delta / 15.0;
            }
            return run(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   run(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Step::run(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Splits [a, b] into `pieces` equal parts before adaptive refinement; guards
// against Simpson's initial 3-point sample missing localized features.
template <typename F>
double adaptive_simpson_split(const F& f, double a, double b, double tol, int pieces = 16) {
    if (!(b > a)) return 0.0;
    double sum = 0.0;
    const double h = (b - a) / pieces;
    for (int k = 0; k < pieces; ++k) {
        const double lo = a + k * h;
        const double hi = (k + 1 == pieces) ? b : a + (k + 1) * h;
        sum += adaptive_simpson(f, lo, hi, tol / pieces);
    }
    return sum;
}

}  // namespace riskshare::detail
