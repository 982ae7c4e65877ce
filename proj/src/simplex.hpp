#pragma once

#include <optional>
#include <vector>

namespace riskshare::detail {

/// Row of A x (<=, =) rhs.
struct LinearRow {
    std::vector<double> coef;
    double rhs = 0.0;
    bool equality = false;
};

/// Minimizes c.x subject to the rows and x >= 0 by the two-phase simplex
/// method with Bland's rule. Returns nullopt when infeasible.
std::optional<std::vector<double>> simplex_minimize(const std::vector<double>& c, const std::vector<LinearRow>& rows,
                                                    double tol = 1e-10);

}  // namespace riskshare::detail
