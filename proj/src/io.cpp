#include "riskshare/io.hpp"

#include "riskshare/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace riskshare::io {

namespace {

double num(const Json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError(std::string("expected a number for ") + what);
}

double num_at(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field ") + key);
    return num(j.at(key), key);
}

double num_or(const Json& j, const char* key, double fallback) {
    return j.contains(key) ? num(j.at(key), key) : fallback;
}

std::vector<double> num_list(const Json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string("expected an array for ") + what);
    std::vector<double> out;
    for (const auto& v : j) out.push_back(num(v, what));
    return out;
}

std::vector<std::pair<double, double>> pair_list(const Json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string("expected an array of pairs for ") + what);
    std::vector<std::pair<double, double>> out;
    for (const auto& v : j) {
        if (!v.is_array() || v.size() != 2) throw ConfigError(std::string("expected [x, y] pairs for ") + what);
        out.emplace_back(num(v[0], what), num(v[1], what));
    }
    return out;
}

Json number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

Json number_list(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

void write(std::ostringstream& os, const Json& j, int indent, int depth) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << '{' << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ',' << nl;
                first = false;
                os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
                write(os, it.value(), indent, depth + 1);
            }
            os << nl << close << '}';
            return;
        }
        case Json::value_t::array: {
            // numeric arrays stay on one line
            const bool flat = std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_primitive(); });
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) os << (flat ? ", " : ",");
                first = false;
                if (!flat) os << nl << pad;
                write(os, v, indent, depth + 1);
            }
            if (!flat) os << nl << close;
            os << ']';
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (std::isnan(v)) {
                os << "null";
            } else if (std::isinf(v)) {
                os << (v > 0 ? "\"inf\"" : "\"-inf\"");
            } else {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                os << buf;
            }
            return;
        }
        default: os << j.dump(); return;
    }
}

}  // namespace

Distortion distortion_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("family")) throw ConfigError("distortion needs a family");
    const auto family = j.at("family").get<std::string>();
    if (family == "identity") return Distortion::identity();
    if (family == "avar") return Distortion::avar(num_at(j, "alpha"));
    if (family == "ph") return Distortion::proportional_hazards(num_at(j, "c"));
    if (family == "dualpower") return Distortion::dual_power(num_at(j, "d"));
    if (family == "pwl") {
        if (!j.contains("points")) throw ConfigError("pwl distortion needs points");
        return Distortion::piecewise_linear(pair_list(j.at("points"), "points"));
    }
    throw ConfigError("unknown distortion family " + family);
}

Json to_json(const Distortion& g) {
    return std::visit(
        [](const auto& f) -> Json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Identity>) {
                return {{"family", "identity"}};
            } else if constexpr (std::is_same_v<T, AVaR>) {
                return {{"family", "avar"}, {"alpha", f.alpha}};
            } else if constexpr (std::is_same_v<T, ProportionalHazards>) {
                return {{"family", "ph"}, {"c", f.c}};
            } else if constexpr (std::is_same_v<T, DualPower>) {
                return {{"family", "dualpower"}, {"d", f.d}};
            } else {
                Json pts = Json::array();
                for (const auto& [p, v] : f.points) pts.push_back({p, v});
                return {{"family", "pwl"}, {"points", pts}};
            }
        },
        g.family());
}

LossModel loss_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("dist")) throw ConfigError("loss needs a dist field");
    const auto dist = j.at("dist").get<std::string>();
    if (dist == "exp") return LossModel::exponential(num_at(j, "mu"));
    if (dist == "discrete") {
        if (!j.contains("atoms") || !j.contains("probs")) throw ConfigError("discrete loss needs atoms and probs");
        return LossModel::discrete(num_list(j.at("atoms"), "atoms"), num_list(j.at("probs"), "probs"));
    }
    if (dist == "equant") {
        if (!j.contains("points")) throw ConfigError("equant loss needs points");
        return LossModel::empirical_quantile(pair_list(j.at("points"), "points"));
    }
    throw ConfigError("unknown loss distribution " + dist);
}

Json to_json(const LossModel& X) {
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return {{"dist", "exp"}, {"mu", v.rate}};
            } else if constexpr (std::is_same_v<T, Discrete>) {
                return {{"dist", "discrete"}, {"atoms", v.atoms}, {"probs", v.probs}};
            } else {
                Json pts = Json::array();
                for (const auto& [p, x] : v.points) pts.push_back({p, x});
                return {{"dist", "equant"}, {"points", pts}};
            }
        },
        X.variant());
}

Ladder ladder_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("breakpoints") || !j.contains("weights")) {
        throw ConfigError("ladder needs breakpoints and weights");
    }
    std::vector<std::vector<double>> w;
    for (const auto& row : j.at("weights")) w.push_back(num_list(row, "weights"));
    std::vector<double> off;
    if (j.contains("offsets")) off = num_list(j.at("offsets"), "offsets");
    return {num_list(j.at("breakpoints"), "breakpoints"), std::move(w), std::move(off)};
}

Json to_json(const Ladder& L) {
    Json w = Json::array();
    for (const auto& row : L.weights()) w.push_back(number_list(row));
    return {{"breakpoints", number_list(L.breakpoints())}, {"weights", w}, {"offsets", number_list(L.offsets())}};
}

std::string ladder_csv(const Ladder& L) {
    std::ostringstream os;
    os << "t_lo,t_hi";
    for (std::size_t i = 0; i < L.agents(); ++i) os << ",w_" << (i + 1);
    os << '\n';
    char buf[32];
    auto put = [&](double v) {
        if (std::isinf(v)) {
            os << (v > 0 ? "inf" : "-inf");
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << buf;
        }
    };
    for (std::size_t k = 0; k < L.layers(); ++k) {
        put(L.breakpoints()[k]);
        os << ',';
        put(L.breakpoints()[k + 1]);
        for (double w : L.weights()[k]) {
            os << ',';
            put(w);
        }
        os << '\n';
    }
    return os.str();
}

AgentSpec agent_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("g")) throw ConfigError("agent needs a distortion g");
    return {distortion_from_json(j.at("g")), num_or(j, "a", 0.0), num_or(j, "b", 0.0), num_or(j, "c", 0.0)};
}

Json to_json(const AgentSpec& a) {
    return {{"g", to_json(a.g())}, {"a", a.a()}, {"b", a.b()}, {"c", a.c()}};
}

PiecewiseLinearMap map_from_json(const Json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "zero") return PiecewiseLinearMap::zero();
        if (s == "identity") return PiecewiseLinearMap::identity();
        throw ConfigError("unknown allocation shorthand " + s);
    }
    if (!j.is_object() || !j.contains("knots") || !j.contains("values")) {
        throw ConfigError("allocation map needs knots and values");
    }
    return {num_list(j.at("knots"), "knots"), num_list(j.at("values"), "values"), num_or(j, "slope_left", 0.0),
            num_or(j, "slope_right", 0.0)};
}

TieRule tie_rule_from_string(const std::string& s) {
    if (s == "lowest") return TieRule::Lowest;
    if (s == "highest") return TieRule::Highest;
    if (s == "split") return TieRule::Split;
    throw ConfigError("tie rule must be lowest, highest or split");
}

std::string to_string(TieRule t) {
    switch (t) {
        case TieRule::Lowest: return "lowest";
        case TieRule::Highest: return "highest";
        case TieRule::Split: return "split";
    }
    return "lowest";
}

ProblemConfig config_from_json(const Json& j) {
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        ProblemConfig cfg;
        if (j.contains("loss")) cfg.loss = loss_from_json(j.at("loss"));
        if (j.contains("agents")) {
            for (const auto& a : j.at("agents")) cfg.agents.push_back(agent_from_json(a));
        }
        if (j.contains("constraints")) {
            for (const auto& c : j.at("constraints")) {
                ConstraintSpec cs;
                const double idx = num_at(c, "agent");
                if (idx < 0 || idx != std::floor(idx)) throw ConfigError("constraint agent must be an index");
                cs.agent = static_cast<std::size_t>(idx);
                if (cs.agent >= cfg.agents.size()) throw ConfigError("constraint refers to an unknown agent");
                cs.h = distortion_from_json(c.at("h"));
                cs.B = num_at(c, "B");
                if (c.contains("lambda")) cs.lambda = num(c.at("lambda"), "lambda");
                cfg.constraints.push_back(std::move(cs));
            }
        }
        if (j.contains("options")) {
            const auto& o = j.at("options");
            if (o.contains("grid_size")) {
                const double g = num(o.at("grid_size"), "grid_size");
                if (!(g >= 2) || g != std::floor(g)) throw ConfigError("grid_size must be an integer >= 2");
                cfg.options.grid_size = static_cast<std::size_t>(g);
            }
            if (o.contains("tie_rule")) cfg.options.tie = tie_rule_from_string(o.at("tie_rule").get<std::string>());
            cfg.options.tol_lambda = num_or(o, "tol_lambda", cfg.options.tol_lambda);
            cfg.options.tol_residual = num_or(o, "tol_residual", cfg.options.tol_residual);
            if (o.contains("delta")) cfg.delta = num(o.at("delta"), "delta");
        }
        if (j.contains("original")) {
            Allocation alloc;
            for (const auto& m : j.at("original")) alloc.push_back(map_from_json(m));
            if (alloc.size() != cfg.agents.size()) throw ConfigError("original allocation needs one map per agent");
            cfg.original = std::move(alloc);
        }
        if (j.contains("buyer")) {
            const auto& b = j.at("buyer");
            if (!b.contains("g") || !b.contains("h")) throw ConfigError("buyer needs g and h");
            cfg.buyer = BuyerProblem{distortion_from_json(b.at("g")), distortion_from_json(b.at("h")),
                                     num_or(b, "b", 0.0), num_at(b, "theta"), num_at(b, "B")};
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

Json to_json(const SolveReport& r) {
    Json agents = Json::array();
    for (const auto& a : r.agents) {
        agents.push_back({{"value", number(a.value)}, {"distorted", number(a.distorted)}, {"mean", number(a.mean)}});
    }
    Json ties = Json::array();
    for (const auto& s : r.ties) ties.push_back(number_list({s.lo, s.hi}));
    Json out{{"agents", agents},
             {"objective", number(r.objective)},
             {"envelope", number(r.envelope)},
             {"ties", ties},
             {"lambdas", number_list(r.lambdas)},
             {"constraint_values", number_list(r.constraint_values)},
             {"converged", r.converged},
             {"best_effort", r.best_effort},
             {"tie_mixture", r.tie_mixture}};
    if (!r.case_label.empty()) out["case"] = r.case_label;
    return out;
}

Json to_json(const Classification& c) {
    Json reps = Json::array();
    for (const auto& L : c.representatives) reps.push_back(to_json(L));
    return {{"case", c.label},
            {"d", number(c.d)},
            {"lambda", number(c.lambda)},
            {"non_unique", c.non_unique},
            {"representatives", reps}};
}

std::string dump(const Json& j, int indent) {
    std::ostringstream os;
    write(os, j, indent, 0);
    return os.str();
}

}  // namespace riskshare::io
