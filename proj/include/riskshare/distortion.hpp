#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace riskshare {

/// Tolerance used for pointwise equality checks on distortions.
inline constexpr double kDistortionTol = 1e-12;

enum class Concavity { Concave, Convex, Neither };

struct Identity {};

/// g(p) = min(alpha p, 1), alpha > 1.
struct AVaR {
    double alpha;
};

/// g(p) = p^c, 0 < c < 1.
struct ProportionalHazards {
    double c;
};

/// g(p) = 1 - (1 - p)^d, d > 1.
struct DualPower {
    double d;
};

/// Linear interpolation through (p, value) vertices covering [0, 1].
struct PiecewiseLinear {
    std::vector<std::pair<double, double>> points;
};

struct ValidityReport {
    bool boundary_ok = true;
    bool monotone = true;
    Concavity concavity = Concavity::Neither;
    std::vector<std::string> failures;

    [[nodiscard]] bool valid() const { return boundary_ok && monotone; }
    [[nodiscard]] bool concave() const { return concavity == Concavity::Concave; }
};

/// A distortion function g: [0,1] -> [0,1] with g(0) = 0, g(1) = 1.
///
/// Analytic families keep their closed forms; piecewise-linear distortions
/// store vertices with strictly increasing abscissae. Instances are
/// immutable after construction.
class Distortion {
public:
    using Family = std::variant<Identity, AVaR, ProportionalHazards, DualPower, PiecewiseLinear>;

    Distortion();

    static Distortion identity();
    static Distortion avar(double alpha);
    static Distortion proportional_hazards(double c);
    static Distortion dual_power(double d);
    static Distortion piecewise_linear(std::vector<std::pair<double, double>> points);

    /// Builds the piecewise-linear interpolant of `g` on `grid` (must contain 0 and 1).
    static Distortion linearize(const Distortion& g, const std::vector<double>& grid);

    [[nodiscard]] const Family& family() const { return family_; }
    [[nodiscard]] Concavity concavity() const { return concavity_; }
    [[nodiscard]] std::string name() const;

    /// g(p); throws DomainError outside [0, 1].
    [[nodiscard]] double operator()(double p) const;

    /// Left derivative g'(p-) for p in (0, 1]; right derivative at 0.
    /// Returns +inf where the derivative is unbounded (PH at 0).
    [[nodiscard]] double slope_left(double p) const;
    [[nodiscard]] double slope_right(double p) const;

    /// p -> 1 - g(1 - p). Concavity flips.
    [[nodiscard]] Distortion dual() const;

    /// True for families that are exactly piecewise linear.
    [[nodiscard]] bool is_piecewise_linear() const;

    /// Interior abscissae where the slope changes (piecewise-linear families only).
    [[nodiscard]] std::vector<double> kinks() const;

    /// Vertices for piecewise-linear families (including 0 and 1).
    [[nodiscard]] std::vector<std::pair<double, double>> vertices() const;

    /// Exact integral of g over [a, b], 0 <= a <= b <= 1.
    [[nodiscard]] double integral(double a, double b) const;

    /// Integral of g(p)/p over [a, b], 0 <= a <= b <= 1. Closed form except
    /// for the dual-power family, which uses adaptive quadrature.
    [[nodiscard]] double integral_over_p(double a, double b) const;

private:
    explicit Distortion(Family f);

    Family family_;
    Concavity concavity_ = Concavity::Neither;
};

/// Boundary, monotonicity and concavity report; never throws.
ValidityReport validate(const Distortion& g);

/// Same checks on a raw vertex list (used before construction).
ValidityReport validate_points(const std::vector<std::pair<double, double>>& points);

}  // namespace riskshare
