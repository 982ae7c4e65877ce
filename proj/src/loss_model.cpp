#include "riskshare/loss_model.hpp"

#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace riskshare {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// S on an empirical quantile table. q is linear and non-increasing between
// rows, so S is its generalized inverse.
double table_survival(const std::vector<std::pair<double, double>>& pts, double t) {
    if (t < pts.back().second) return 1.0;
    if (t >= pts.front().second) return 0.0;
    // smallest p with q(p) <= t; S(t) = that p (q continuous)
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double v0 = pts[k].second;
        const double v1 = pts[k + 1].second;
        if (v1 <= t) {
            if (v0 <= t) return pts[k].first;
            const double w = (v0 - t) / (v0 - v1);
            return pts[k].first + w * (pts[k + 1].first - pts[k].first);
        }
    }
    return 1.0;
}

}  // namespace

LossModel LossModel::discrete(std::vector<double> atoms, std::vector<double> probs) {
    if (atoms.empty() || atoms.size() != probs.size()) {
        throw DomainError("discrete model needs matching non-empty atoms and probs");
    }
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        if (!std::isfinite(atoms[j])) throw DomainError("discrete atoms must be finite");
        if (!(probs[j] > 0.0)) throw DomainError("discrete probabilities must be positive");
        if (j > 0 && !(atoms[j] > atoms[j - 1])) {
            throw DomainError("discrete atoms must be strictly increasing");
        }
    }
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(total - 1.0) > kProbTol) throw DomainError("discrete probabilities must sum to 1");
    LossModel m(Discrete{std::move(atoms), std::move(probs)});
    const auto& d = std::get<Discrete>(m.variant_);
    m.tails_.assign(d.atoms.size(), 0.0);
    double acc = 0.0;
    for (std::size_t j = d.atoms.size(); j-- > 0;) {
        m.tails_[j] = std::min(acc, 1.0);
        acc += d.probs[j];
    }
    return m;
}

LossModel LossModel::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential rate must be positive");
    return LossModel(Exponential{rate});
}

LossModel LossModel::empirical_quantile(std::vector<std::pair<double, double>> points) {
    if (points.size() < 2) throw DomainError("quantile table needs at least two rows");
    if (points.front().first != 0.0 || points.back().first != 1.0) {
        throw DomainError("quantile table must span p in [0, 1]");
    }
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        if (!(points[k + 1].first > points[k].first)) {
            throw DomainError("quantile table p must be strictly increasing");
        }
        if (points[k + 1].second > points[k].second) {
            throw DomainError("quantile table values must be non-increasing in p");
        }
    }
    for (const auto& [p, v] : points) {
        if (!std::isfinite(v)) throw DomainError("quantile table values must be finite");
    }
    return LossModel(EmpiricalQuantile{std::move(points)});
}

LossModel LossModel::bernoulli(double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("bernoulli parameter must be in (0, 1)");
    return discrete({0.0, 1.0}, {1.0 - q, q});
}

double LossModel::survival(double t) const {
    return std::visit(overloaded{
                          [&](const Discrete& d) {
                              auto it = std::upper_bound(d.atoms.begin(), d.atoms.end(), t);
                              if (it == d.atoms.begin()) return 1.0;
                              return tails_[static_cast<std::size_t>(it - d.atoms.begin()) - 1];
                          },
                          [&](const Exponential& e) { return t < 0.0 ? 1.0 : std::exp(-e.rate * t); },
                          [&](const EmpiricalQuantile& q) { return table_survival(q.points, t); },
                      },
                      variant_);
}

double LossModel::survival_left(double t) const {
    return std::visit(overloaded{
                          [&](const Discrete& d) {
                              auto it = std::lower_bound(d.atoms.begin(), d.atoms.end(), t);
                              if (it == d.atoms.begin()) return 1.0;
                              return tails_[static_cast<std::size_t>(it - d.atoms.begin()) - 1];
                          },
                          [&](const Exponential& e) { return t <= 0.0 ? 1.0 : std::exp(-e.rate * t); },
                          [&](const EmpiricalQuantile& q) {
                              // S is continuous except where q is flat
                              const double s = table_survival(q.points, t);
                              double best = s;
                              for (std::size_t k = 0; k + 1 < q.points.size(); ++k) {
                                  if (q.points[k].second == t && q.points[k + 1].second == t) {
                                      best = std::max(best, q.points[k + 1].first);
                                  }
                              }
                              if (t <= q.points.back().second) best = 1.0;
                              return best;
                          },
                      },
                      variant_);
}

double LossModel::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level outside [0, 1]");
    return std::visit(overloaded{
                          [&](const Discrete& d) {
                              // largest atom whose tail P(X >= atom) exceeds p
                              for (std::size_t j = d.atoms.size(); j-- > 0;) {
                                  const double tail_incl = tails_[j] + d.probs[j];
                                  if (tail_incl > p) return d.atoms[j];
                              }
                              return d.atoms.front();
                          },
                          [&](const Exponential& e) {
                              if (p == 0.0) return kInf;
                              return -std::log(p) / e.rate;
                          },
                          [&](const EmpiricalQuantile& q) {
                              const auto& pts = q.points;
                              auto it = std::upper_bound(
                                  pts.begin(), pts.end(), p,
                                  [](double x, const auto& row) { return x < row.first; });
                              std::size_t k = static_cast<std::size_t>(it - pts.begin());
                              if (k == 0) return pts.front().second;
                              k = std::min(k - 1, pts.size() - 2);
                              const double w = (p - pts[k].first) / (pts[k + 1].first - pts[k].first);
                              return pts[k].second + w * (pts[k + 1].second - pts[k].second);
                          },
                      },
                      variant_);
}

double LossModel::mean() const {
    return std::visit(overloaded{
                          [](const Discrete& d) {
                              return std::inner_product(d.atoms.begin(), d.atoms.end(),
                                                        d.probs.begin(), 0.0);
                          },
                          [](const Exponential& e) { return 1.0 / e.rate; },
                          [](const EmpiricalQuantile& q) {
                              double sum = 0.0;
                              for (std::size_t k = 0; k + 1 < q.points.size(); ++k) {
                                  sum += 0.5 * (q.points[k + 1].first - q.points[k].first) *
                                         (q.points[k].second + q.points[k + 1].second);
                              }
                              return sum;
                          },
                      },
                      variant_);
}

double LossModel::ess_sup() const {
    return std::visit(overloaded{
                          [](const Discrete& d) { return d.atoms.back(); },
                          [](const Exponential&) { return kInf; },
                          [](const EmpiricalQuantile& q) { return q.points.front().second; },
                      },
                      variant_);
}

std::vector<double> LossModel::breakpoints() const {
    return std::visit(overloaded{
                          [](const Discrete& d) { return d.atoms; },
                          [](const Exponential&) { return std::vector<double>{0.0}; },
                          [](const EmpiricalQuantile& q) {
                              std::vector<double> out;
                              for (const auto& row : q.points) out.push_back(row.second);
                              std::sort(out.begin(), out.end());
                              out.erase(std::unique(out.begin(), out.end()), out.end());
                              return out;
                          },
                      },
                      variant_);
}

const Discrete& LossModel::as_discrete() const {
    const auto* d = std::get_if<Discrete>(&variant_);
    if (d == nullptr) throw DomainError("loss model is not discrete");
    return *d;
}

std::vector<double> LossModel::tail_masses() const {
    (void)as_discrete();
    return tails_;
}

LossModel LossModel::affine(double scale, double shift) const {
    if (!(scale >= 0.0)) throw DomainError("affine scale must be non-negative");
    const auto& d = as_discrete();
    if (scale == 0.0) return discrete({shift}, {1.0});
    std::vector<double> atoms;
    atoms.reserve(d.atoms.size());
    for (double a : d.atoms) atoms.push_back(shift + scale * a);
    std::vector<double> probs = d.probs;
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) p /= total;
    return discrete(std::move(atoms), std::move(probs));
}

}  // namespace riskshare
