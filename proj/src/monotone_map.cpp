#include "riskshare/monotone_map.hpp"

#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskshare {

PiecewiseLinearMap::PiecewiseLinearMap(std::vector<double> knots, std::vector<double> values,
                                       double slope_left, double slope_right)
    : knots_(std::move(knots)), values_(std::move(values)), slope_left_(slope_left),
      slope_right_(slope_right) {
    if (knots_.empty() || knots_.size() != values_.size()) {
        throw DomainError("map needs matching non-empty knots and values");
    }
    for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
        if (!(knots_[k + 1] > knots_[k])) throw DomainError("map knots must be strictly increasing");
    }
    if (!std::isfinite(slope_left_) || !std::isfinite(slope_right_)) {
        throw DomainError("map end slopes must be finite");
    }
}

PiecewiseLinearMap PiecewiseLinearMap::identity() { return {{0.0}, {0.0}, 1.0, 1.0}; }

PiecewiseLinearMap PiecewiseLinearMap::constant(double k) { return {{0.0}, {k}, 0.0, 0.0}; }

PiecewiseLinearMap PiecewiseLinearMap::stop_loss(double d) { return {{d}, {0.0}, 0.0, 1.0}; }

PiecewiseLinearMap PiecewiseLinearMap::capped_stop_loss(double d, double cap) {
    if (!(cap > 0.0)) return constant(0.0);
    return {{d, d + cap}, {0.0, cap}, 0.0, 0.0};
}

PiecewiseLinearMap PiecewiseLinearMap::linear(double scale) { return {{0.0}, {0.0}, scale, scale}; }

double PiecewiseLinearMap::operator()(double x) const {
    if (x <= knots_.front()) return values_.front() + slope_left_ * (x - knots_.front());
    if (x >= knots_.back()) return values_.back() + slope_right_ * (x - knots_.back());
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double w = (x - knots_[k]) / (knots_[k + 1] - knots_[k]);
    return values_[k] + w * (values_[k + 1] - values_[k]);
}

bool PiecewiseLinearMap::non_decreasing() const {
    if (slope_left_ < 0.0 || slope_right_ < 0.0) return false;
    for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
        if (values_[k + 1] < values_[k]) return false;
    }
    return true;
}

std::vector<PiecewiseLinearMap::Piece> PiecewiseLinearMap::pieces() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<Piece> out;
    out.push_back({-inf, knots_.front(), slope_left_});
    for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
        out.push_back({knots_[k], knots_[k + 1],
                       (values_[k + 1] - values_[k]) / (knots_[k + 1] - knots_[k])});
    }
    out.push_back({knots_.back(), inf, slope_right_});
    return out;
}

}  // namespace riskshare
