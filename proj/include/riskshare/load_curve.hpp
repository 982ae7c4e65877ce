#pragma once

#include "riskshare/distortion.hpp"
#include "riskshare/loss_model.hpp"
#include "riskshare/risk_measure.hpp"

#include <optional>
#include <vector>

namespace riskshare {

struct LoadTerm {
    double coef = 0.0;
    Distortion g;
};

/// Marginal cost of a tranche as a function of its exceedance probability:
///     Q(p) = (sum_j coef_j g_j(p) + linear * p) / |normalizer|.
class LoadCurve {
public:
    LoadCurve(std::vector<LoadTerm> terms, double linear, double normalizer);

    [[nodiscard]] double operator()(double p) const;
    [[nodiscard]] double normalizer() const { return normalizer_; }
    [[nodiscard]] const std::vector<LoadTerm>& terms() const { return terms_; }
    [[nodiscard]] double linear() const { return linear_; }

    /// True when every term is piecewise linear; Q is then exactly piecewise linear.
    [[nodiscard]] bool is_piecewise_linear() const;
    /// Union of the kinks of all terms.
    [[nodiscard]] std::vector<double> kinks() const;

    /// Upper bound on the integral of |Q(S_X(t))| over [lo, hi].
    [[nodiscard]] double abs_layer_bound(const LossModel& X, double lo, double hi) const;

private:
    std::vector<LoadTerm> terms_;
    double linear_;
    double normalizer_;
};

/// Q(p) = [(1 + b) g(p) + lambda h(p) + c p] / |1 + b + c + lambda|.
LoadCurve risk_load_curve(const AgentSpec& agent, double lambda = 0.0,
                          const std::optional<Distortion>& h = std::nullopt);

}  // namespace riskshare
