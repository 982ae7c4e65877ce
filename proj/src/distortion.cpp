#include "riskshare/distortion.hpp"

#include "numeric.hpp"
#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace riskshare {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Index k of the segment [p_k, p_{k+1}] containing p (rightmost for vertices).
std::size_t segment_of(const std::vector<std::pair<double, double>>& pts, double p) {
    auto it = std::upper_bound(pts.begin(), pts.end(), p,
                               [](double x, const auto& v) { return x < v.first; });
    std::size_t k = static_cast<std::size_t>(std::distance(pts.begin(), it));
    if (k == 0) return 0;
    return std::min(k - 1, pts.size() - 2);
}

double segment_slope(const std::vector<std::pair<double, double>>& pts, std::size_t k) {
    return (pts[k + 1].second - pts[k].second) / (pts[k + 1].first - pts[k].first);
}

std::vector<std::pair<double, double>> avar_points(double alpha) {
    return {{0.0, 0.0}, {1.0 / alpha, 1.0}, {1.0, 1.0}};
}

void check_unit(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream os;
        os << "distortion argument " << p << " outside [0, 1]";
        throw DomainError(os.str());
    }
}

}  // namespace

ValidityReport validate_points(const std::vector<std::pair<double, double>>& pts) {
    ValidityReport r;
    if (pts.size() < 2) {
        r.boundary_ok = false;
        r.failures.emplace_back("piecewise-linear distortion needs at least two vertices");
        return r;
    }
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (!(pts[k + 1].first > pts[k].first)) {
            r.monotone = false;
            r.failures.emplace_back("abscissae must be strictly increasing");
            return r;
        }
    }
    if (pts.front().first != 0.0 || pts.back().first != 1.0) {
        r.boundary_ok = false;
        r.failures.emplace_back("vertices must span [0, 1]");
    }
    if (std::abs(pts.front().second) > kDistortionTol) {
        r.boundary_ok = false;
        r.failures.emplace_back("g(0) != 0");
    }
    if (std::abs(pts.back().second - 1.0) > kDistortionTol) {
        r.boundary_ok = false;
        r.failures.emplace_back("g(1) != 1");
    }
    bool non_increasing = true;
    bool non_decreasing = true;
    double prev = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double s = segment_slope(pts, k);
        if (s < -kDistortionTol) {
            r.monotone = false;
        }
        if (k > 0) {
            if (s > prev + kDistortionTol) non_increasing = false;
            if (s < prev - kDistortionTol) non_decreasing = false;
        }
        prev = s;
    }
    if (!r.monotone) r.failures.emplace_back("distortion decreases somewhere");
    r.concavity = non_increasing ? Concavity::Concave
                                 : (non_decreasing ? Concavity::Convex : Concavity::Neither);
    return r;
}

Distortion::Distortion() : Distortion(Identity{}) {}

Distortion::Distortion(Family f) : family_(std::move(f)) {
    concavity_ = std::visit(
        overloaded{
            [](const Identity&) { return Concavity::Concave; },
            [](const AVaR&) { return Concavity::Concave; },
            [](const ProportionalHazards& ph) {
                return ph.c <= 1.0 ? Concavity::Concave : Concavity::Convex;
            },
            [](const DualPower& dp) {
                return dp.d >= 1.0 ? Concavity::Concave : Concavity::Convex;
            },
            [](const PiecewiseLinear& pl) { return validate_points(pl.points).concavity; },
        },
        family_);
}

Distortion Distortion::identity() { return Distortion(Identity{}); }

Distortion Distortion::avar(double alpha) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
        throw DomainError("AVaR distortion requires alpha > 1");
    }
    return Distortion(AVaR{alpha});
}

Distortion Distortion::proportional_hazards(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("proportional hazards exponent must be positive");
    }
    return Distortion(ProportionalHazards{c});
}

Distortion Distortion::dual_power(double d) {
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw DomainError("dual power exponent must be positive");
    }
    return Distortion(DualPower{d});
}

Distortion Distortion::piecewise_linear(std::vector<std::pair<double, double>> points) {
    const ValidityReport r = validate_points(points);
    if (!r.valid()) {
        std::string msg = "invalid piecewise-linear distortion:";
        for (const auto& f : r.failures) msg += " " + f + ";";
        throw DomainError(msg);
    }
    points.front().second = 0.0;
    points.back().second = 1.0;
    return Distortion(PiecewiseLinear{std::move(points)});
}

Distortion Distortion::linearize(const Distortion& g, const std::vector<double>& grid) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(grid.size());
    for (double p : grid) pts.emplace_back(p, g(p));
    return piecewise_linear(std::move(pts));
}

std::string Distortion::name() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Identity&) { os << "identity"; },
                   [&](const AVaR& a) { os << "avar(" << a.alpha << ")"; },
                   [&](const ProportionalHazards& ph) { os << "ph(" << ph.c << ")"; },
                   [&](const DualPower& dp) { os << "dualpower(" << dp.d << ")"; },
                   [&](const PiecewiseLinear& pl) { os << "pwl[" << pl.points.size() << "]"; },
               },
               family_);
    return os.str();
}

double Distortion::operator()(double p) const {
    check_unit(p);
    return std::visit(overloaded{
                          [&](const Identity&) { return p; },
                          [&](const AVaR& a) { return std::min(a.alpha * p, 1.0); },
                          [&](const ProportionalHazards& ph) { return std::pow(p, ph.c); },
                          [&](const DualPower& dp) {
                              return -std::expm1(dp.d * std::log1p(-p));
                          },
                          [&](const PiecewiseLinear& pl) {
                              const auto& pts = pl.points;
                              const std::size_t k = segment_of(pts, p);
                              const double w = (p - pts[k].first) / (pts[k + 1].first - pts[k].first);
                              return pts[k].second + w * (pts[k + 1].second - pts[k].second);
                          },
                      },
                      family_);
}

double Distortion::slope_left(double p) const {
    check_unit(p);
    if (p == 0.0) return slope_right(0.0);
    return std::visit(
        overloaded{
            [&](const Identity&) { return 1.0; },
            [&](const AVaR& a) { return p <= 1.0 / a.alpha ? a.alpha : 0.0; },
            [&](const ProportionalHazards& ph) { return ph.c * std::pow(p, ph.c - 1.0); },
            [&](const DualPower& dp) {
                if (p == 1.0) return dp.d > 1.0 ? 0.0 : (dp.d == 1.0 ? 1.0 : kInf);
                return dp.d * std::pow(1.0 - p, dp.d - 1.0);
            },
            [&](const PiecewiseLinear& pl) {
                const auto& pts = pl.points;
                std::size_t k = segment_of(pts, p);
                if (k > 0 && pts[k].first == p) --k;
                return segment_slope(pts, k);
            },
        },
        family_);
}

double Distortion::slope_right(double p) const {
    check_unit(p);
    if (p == 1.0) return slope_left(1.0);
    return std::visit(
        overloaded{
            [&](const Identity&) { return 1.0; },
            [&](const AVaR& a) { return p < 1.0 / a.alpha ? a.alpha : 0.0; },
            [&](const ProportionalHazards& ph) {
                if (p == 0.0) return ph.c < 1.0 ? kInf : (ph.c == 1.0 ? 1.0 : 0.0);
                return ph.c * std::pow(p, ph.c - 1.0);
            },
            [&](const DualPower& dp) { return dp.d * std::pow(1.0 - p, dp.d - 1.0); },
            [&](const PiecewiseLinear& pl) { return segment_slope(pl.points, segment_of(pl.points, p)); },
        },
        family_);
}

Distortion Distortion::dual() const {
    return std::visit(
        overloaded{
            [](const Identity&) { return Distortion::identity(); },
            [](const AVaR& a) {
                return Distortion::piecewise_linear(
                    {{0.0, 0.0}, {1.0 - 1.0 / a.alpha, 0.0}, {1.0, 1.0}});
            },
            // 1 - (1 - p)^c and p^d swap between the two power families.
            [](const ProportionalHazards& ph) { return Distortion::dual_power(ph.c); },
            [](const DualPower& dp) { return Distortion::proportional_hazards(dp.d); },
            [](const PiecewiseLinear& pl) {
                std::vector<std::pair<double, double>> pts;
                pts.reserve(pl.points.size());
                for (auto it = pl.points.rbegin(); it != pl.points.rend(); ++it) {
                    pts.emplace_back(1.0 - it->first, 1.0 - it->second);
                }
                pts.front().first = 0.0;
                pts.back().first = 1.0;
                return Distortion::piecewise_linear(std::move(pts));
            },
        },
        family_);
}

bool Distortion::is_piecewise_linear() const {
    return std::holds_alternative<Identity>(family_) || std::holds_alternative<AVaR>(family_) ||
           std::holds_alternative<PiecewiseLinear>(family_);
}

std::vector<std::pair<double, double>> Distortion::vertices() const {
    if (const auto* a = std::get_if<AVaR>(&family_)) return avar_points(a->alpha);
    if (const auto* pl = std::get_if<PiecewiseLinear>(&family_)) return pl->points;
    if (std::holds_alternative<Identity>(family_)) return {{0.0, 0.0}, {1.0, 1.0}};
    return {};
}

std::vector<double> Distortion::kinks() const {
    std::vector<double> out;
    const auto v = vertices();
    for (std::size_t k = 1; k + 1 < v.size(); ++k) out.push_back(v[k].first);
    return out;
}

double Distortion::integral(double a, double b) const {
    check_unit(a);
    check_unit(b);
    if (b <= a) return 0.0;
    return std::visit(
        overloaded{
            [&](const ProportionalHazards& ph) {
                return (std::pow(b, ph.c + 1.0) - std::pow(a, ph.c + 1.0)) / (ph.c + 1.0);
            },
            [&](const DualPower& dp) {
                return (b - a) +
                       (std::pow(1.0 - b, dp.d + 1.0) - std::pow(1.0 - a, dp.d + 1.0)) / (dp.d + 1.0);
            },
            [&](const auto&) {
                const auto pts = vertices();
                double sum = 0.0;
                for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
                    const double lo = std::max(a, pts[k].first);
                    const double hi = std::min(b, pts[k + 1].first);
                    if (hi <= lo) continue;
                    sum += 0.5 * (hi - lo) * ((*this)(lo) + (*this)(hi));
                }
                return sum;
            },
        },
        family_);
}

double Distortion::integral_over_p(double a, double b) const {
    check_unit(a);
    check_unit(b);
    if (b <= a) return 0.0;
    return std::visit(
        overloaded{
            [&](const ProportionalHazards& ph) {
                return (std::pow(b, ph.c) - std::pow(a, ph.c)) / ph.c;
            },
            [&](const DualPower& dp) {
                const double d = dp.d;
                auto phi = [d](double p) {
                    if (p == 0.0) return d;
                    return -std::expm1(d * std::log1p(-p)) / p;
                };
                const double scale = std::max(1.0, d);
                return detail::adaptive_simpson_split(phi, a, b, 1e-14 * scale, 32);
            },
            [&](const auto&) {
                const auto pts = vertices();
                double sum = 0.0;
                for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
                    const double lo = std::max(a, pts[k].first);
                    const double hi = std::min(b, pts[k + 1].first);
                    if (hi <= lo) continue;
                    const double s = segment_slope(pts, k);
                    const double intercept = pts[k].second - s * pts[k].first;
                    double term = s * (hi - lo);
                    if (lo > 0.0) {
                        term += intercept * std::log(hi / lo);
                    } else if (std::abs(intercept) > kDistortionTol) {
                        throw DivergenceError("integral of g(p)/p diverges at p = 0");
                    }
                    sum += term;
                }
                return sum;
            },
        },
        family_);
}

ValidityReport validate(const Distortion& g) {
    if (const auto* pl = std::get_if<PiecewiseLinear>(&g.family())) {
        return validate_points(pl->points);
    }
    ValidityReport r;
    r.concavity = g.concavity();
    return r;
}

}  // namespace riskshare
