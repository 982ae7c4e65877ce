#pragma once

#include "riskshare/loss_model.hpp"
#include "riskshare/monotone_map.hpp"
#include "riskshare/risk_measure.hpp"

#include <string>
#include <vector>

namespace riskshare {

/// Comonotone allocation of a non-negative total loss as a ladder of layers.
///
/// Layer k spans [t_k, t_{k+1}) and is shared according to weights[k], a
/// point of the simplex. Agent i receives
///     f_i(x) = offset_i + sum_k weights[k][i] * |[t_k, t_{k+1}) ∩ [0, x)|,
/// so that sum_i f_i(x) = x whenever the offsets sum to zero. The final
/// breakpoint may be +inf; a finite one is extended by its last layer.
/// Adjacent layers with identical weights are merged on construction.
class Ladder {
public:
    Ladder(std::vector<double> breakpoints, std::vector<std::vector<double>> weights,
           std::vector<double> offsets = {});

    /// Single layer [0, inf) owned entirely by `owner`.
    static Ladder single_owner(std::size_t n, std::size_t owner);

    [[nodiscard]] std::size_t agents() const { return offsets_.size(); }
    [[nodiscard]] std::size_t layers() const { return weights_.size(); }
    [[nodiscard]] const std::vector<double>& breakpoints() const { return breakpoints_; }
    [[nodiscard]] const std::vector<std::vector<double>>& weights() const { return weights_; }
    [[nodiscard]] const std::vector<double>& offsets() const { return offsets_; }

    /// f_i(x), x >= 0.
    [[nodiscard]] double apply(std::size_t i, double x) const;
    /// f_i'(x+): the weight of the layer containing x.
    [[nodiscard]] double marginal(std::size_t i, double x) const;
    /// Index of the layer containing x >= 0.
    [[nodiscard]] std::size_t layer_at(double x) const;

    [[nodiscard]] PiecewiseLinearMap component(std::size_t i) const;
    [[nodiscard]] Allocation components() const;

    /// Adds side-payment constants (summing to zero) to the offsets.
    [[nodiscard]] Ladder shift(const std::vector<double>& deltas) const;

    /// Payout matrix [agent][atom].
    [[nodiscard]] std::vector<std::vector<double>> payouts(const std::vector<double>& atoms) const;

    /// Interior breakpoints where agent i's marginal share changes.
    [[nodiscard]] std::vector<double> switch_points(std::size_t i) const;

    friend bool operator==(const Ladder&, const Ladder&) = default;

private:
    void canonicalize();

    std::vector<double> breakpoints_;
    std::vector<std::vector<double>> weights_;
    std::vector<double> offsets_;
};

/// Layerwise convex combination tau * a + (1 - tau) * b. Comonotone
/// additivity makes every H_g of a component affine in tau.
Ladder mix(const Ladder& a, const Ladder& b, double tau);

/// True iff every pair of rows moves together across the columns (states).
bool comonotone_check(const std::vector<std::vector<double>>& values);

struct SidePayments {
    bool feasible = false;
    std::vector<double> deltas;   // cash added to each agent's share
    std::vector<double> margins;  // H_{g_i}(X_i) - a_i - V_i(f_i(X)) before payments
    std::string reason;
};

/// Constants summing to zero that restore participation for every agent,
/// chosen as the analytic center of the feasible set.
SidePayments side_payments(const std::vector<AgentSpec>& agents, const Ladder& ladder,
                           const Allocation& original, const LossModel& X);

}  // namespace riskshare
