#pragma once

#include <utility>
#include <variant>
#include <vector>

namespace riskshare {

/// Finite distribution on strictly increasing atoms.
struct Discrete {
    std::vector<double> atoms;
    std::vector<double> probs;
};

struct Exponential {
    double rate;  // mu
};

/// Quantile function S^{-1} given at (p, value) rows, interpolated linearly.
/// Rows have strictly increasing p spanning [0, 1] and non-increasing values.
struct EmpiricalQuantile {
    std::vector<std::pair<double, double>> points;
};

/// Loss distribution exposing survival S(t) = P(X > t), the right-continuous
/// pseudo-inverse S^{-1}(p) = sup{t : S(t) > p}, and the mean.
class LossModel {
public:
    using Variant = std::variant<Discrete, Exponential, EmpiricalQuantile>;

    static LossModel discrete(std::vector<double> atoms, std::vector<double> probs);
    static LossModel exponential(double rate);
    static LossModel empirical_quantile(std::vector<std::pair<double, double>> points);
    /// Convenience: P(X = 1) = q, P(X = 0) = 1 - q.
    static LossModel bernoulli(double q);

    [[nodiscard]] const Variant& variant() const { return variant_; }
    [[nodiscard]] bool is_discrete() const { return std::holds_alternative<Discrete>(variant_); }

    [[nodiscard]] double survival(double t) const;
    /// Left limit S(t-) = P(X >= t).
    [[nodiscard]] double survival_left(double t) const;
    /// quantile(1) is the essential infimum by convention; quantile(0) the essential supremum.
    [[nodiscard]] double quantile(double p) const;
    [[nodiscard]] double mean() const;

    [[nodiscard]] double ess_inf() const { return quantile(1.0); }
    [[nodiscard]] double ess_sup() const;

    /// Points where S changes its functional form (atoms, table values).
    [[nodiscard]] std::vector<double> breakpoints() const;

    /// Discrete view: atoms and the tail masses S_j = P(X > atoms[j]).
    [[nodiscard]] const Discrete& as_discrete() const;
    [[nodiscard]] std::vector<double> tail_masses() const;

    /// Discrete model of a + scale * X (scale >= 0).
    [[nodiscard]] LossModel affine(double scale, double shift) const;

private:
    explicit LossModel(Variant v) : variant_(std::move(v)) {}

    Variant variant_;
    std::vector<double> tails_;  // discrete only
};

}  // namespace riskshare
