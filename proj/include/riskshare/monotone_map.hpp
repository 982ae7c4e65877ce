#pragma once

#include <vector>

namespace riskshare {

/// Continuous piecewise-linear map x -> f(x) given by knots with linear
/// extension outside them. Used to describe payouts f(X) of the total loss.
class PiecewiseLinearMap {
public:
    PiecewiseLinearMap(std::vector<double> knots, std::vector<double> values,
                       double slope_left, double slope_right);

    static PiecewiseLinearMap identity();
    static PiecewiseLinearMap constant(double k);
    static PiecewiseLinearMap zero() { return constant(0.0); }
    /// (x - d)_+
    static PiecewiseLinearMap stop_loss(double d);
    /// min((x - d)_+, cap)
    static PiecewiseLinearMap capped_stop_loss(double d, double cap);
    /// scale * x
    static PiecewiseLinearMap linear(double scale);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] bool non_decreasing() const;

    [[nodiscard]] const std::vector<double>& knots() const { return knots_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] double slope_left() const { return slope_left_; }
    [[nodiscard]] double slope_right() const { return slope_right_; }

    struct Piece {
        double lo;  // may be -inf
        double hi;  // may be +inf
        double slope;
    };
    /// Linear pieces covering the real line, ordered by lo.
    [[nodiscard]] std::vector<Piece> pieces() const;

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    double slope_left_;
    double slope_right_;
};

}  // namespace riskshare
