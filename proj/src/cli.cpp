#include "riskshare/cli.hpp"

#include "riskshare/constrained.hpp"
#include "riskshare/errors.hpp"
#include "riskshare/io.hpp"
#include "riskshare/oracle.hpp"
#include "riskshare/pareto.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace riskshare {

namespace {

using io::Json;

struct Flags {
    std::string config;
    std::optional<std::size_t> grid;
    std::string tie;
    std::string out;
    std::string format;  // empty: json, except csv for curves
    double theta = 0.0, b = 0.0, alpha = 0.0, beta = 0.0, mu = 0.0, B = 0.0;
};

io::ProblemConfig load(const Flags& f) {
    if (f.config.empty()) throw ConfigError("--config is required");
    auto cfg = io::load_config(f.config);
    if (f.grid) {
        if (*f.grid < 2) throw ConfigError("--grid must be at least 2");
        cfg.options.grid_size = *f.grid;
    }
    if (!f.tie.empty()) cfg.options.tie = io::tie_rule_from_string(f.tie);
    return cfg;
}

const LossModel& need_loss(const io::ProblemConfig& cfg) {
    if (!cfg.loss) throw ConfigError("config has no loss");
    return *cfg.loss;
}

Json rationality_json(const io::ProblemConfig& cfg, const Ladder& L) {
    const auto entries = rationality_check(cfg.agents, *cfg.original, L.components(), *cfg.loss);
    Json rows = Json::array();
    for (const auto& e : entries) {
        rows.push_back({{"h_original", e.h_original},
                        {"v_proposed", e.v_proposed},
                        {"margin", e.margin},
                        {"rational", e.rational}});
    }
    return rows;
}

Json side_payment_json(const io::ProblemConfig& cfg, const Ladder& L) {
    const auto sp = side_payments(cfg.agents, L, *cfg.original, *cfg.loss);
    Json out{{"feasible", sp.feasible}, {"margins", sp.margins}};
    if (sp.feasible) {
        out["deltas"] = sp.deltas;
    } else {
        out["reason"] = sp.reason;
    }
    return out;
}

std::string cmd_solve(const Flags& f) {
    const auto cfg = load(f);
    const auto& X = need_loss(cfg);
    if (cfg.agents.empty()) throw ConfigError("config needs at least one agent");
    if (!cfg.constraints.empty()) throw ConfigError("config has constraints; use the constrained command");
    if (existence_check(cfg.agents) == Existence::DegenerateAllZero && cfg.agents.size() == 2 && cfg.delta) {
        const auto& a = cfg.agents;
        const Ladder L = delta_family_solve(a[0].g(), a[1].g(), a[0].b(), a[1].b(), *cfg.delta, X, cfg.options.tie);
        if (f.format == "csv") return io::ladder_csv(L);
        Json out{{"ladder", io::to_json(L)}, {"report", io::to_json(evaluate_ladder(a, L, X))}};
        return io::dump(out);
    }
    auto [L, report] = pareto_solve(cfg.agents, X, cfg.options);
    if (f.format == "csv") return io::ladder_csv(L);
    const auto hp = hyperplane(cfg.agents, report);
    Json out{{"ladder", io::to_json(L)},
             {"report", io::to_json(report)},
             {"hyperplane", {{"coefficients", hp.coefficients}, {"constant", hp.constant}}}};
    if (cfg.original) {
        out["rationality"] = rationality_json(cfg, L);
        out["side_payments"] = side_payment_json(cfg, L);
    }
    return io::dump(out);
}

std::string cmd_constrained(const Flags& f) {
    const auto cfg = load(f);
    const auto& X = need_loss(cfg);
    if (cfg.constraints.empty()) throw ConfigError("config has no constraints");
    auto [L, report] = constrained_pareto_solve(cfg.agents, cfg.constraints, X, cfg.options);
    // label the two-agent AVaR setting by the crossing structure
    if (cfg.agents.size() == 2 && cfg.constraints.size() == 1 && cfg.constraints[0].agent == 0) {
        const auto& a = cfg.agents;
        const auto* g1 = std::get_if<AVaR>(&a[0].g().family());
        const auto* g2 = std::get_if<AVaR>(&a[1].g().family());
        const auto* h = std::get_if<AVaR>(&cfg.constraints[0].h.family());
        const double theta = -a[0].c() - 1.0;
        const double lam = report.lambdas[0];
        if (g1 && g2 && h && a[1].b() == 0.0 && a[1].c() == a[0].c() && theta > lam + a[0].b()) {
            report.case_label =
                avar_two_agent_crossings(g1->alpha, g2->alpha, h->alpha, theta, a[0].b(), lam).regime;
        }
    }
    if (f.format == "csv") return io::ladder_csv(L);
    Json out{{"ladder", io::to_json(L)}, {"report", io::to_json(report)}};
    if (cfg.original) {
        out["rationality"] = rationality_json(cfg, L);
        out["side_payments"] = side_payment_json(cfg, L);
    }
    return io::dump(out);
}

std::string cmd_buyer(const Flags& f) {
    const auto cfg = load(f);
    const auto& X = need_loss(cfg);
    if (!cfg.buyer) throw ConfigError("config has no buyer section");
    const auto sol = buyer_solve(*cfg.buyer, X, cfg.options);
    if (f.format == "csv") return io::ladder_csv(sol.ladder);
    Json out{{"ladder", io::to_json(sol.ladder)}, {"lambda", sol.lambda}, {"report", io::to_json(sol.report)}};
    return io::dump(out);
}

std::string cmd_classify(const Flags& f) {
    try {
        return io::dump(io::to_json(classify_exponential_avar(f.theta, f.b, f.alpha, f.beta, f.mu, f.B)));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

std::string cmd_curves(const Flags& f) {
    auto cfg = load(f);
    if (cfg.agents.empty()) throw ConfigError("config needs at least one agent");
    const std::size_t n = f.grid.value_or(100);
    std::vector<LoadCurve> curves;
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        double lam = 0.0;
        std::optional<Distortion> h;
        for (const auto& c : cfg.constraints) {
            if (c.agent == i && c.lambda) {
                lam = *c.lambda;
                h = c.h;
            }
        }
        curves.push_back(risk_load_curve(cfg.agents[i], lam, h));
    }
    std::vector<double> ps;
    for (std::size_t k = 0; k <= n; ++k) ps.push_back(static_cast<double>(k) / static_cast<double>(n));
    if (f.format == "json") {
        Json q = Json::array();
        for (const auto& c : curves) {
            Json col = Json::array();
            for (double p : ps) col.push_back(c(p));
            q.push_back(col);
        }
        return io::dump(Json{{"p", ps}, {"Q", q}});
    }
    std::ostringstream os;
    os << 'p';
    for (std::size_t i = 0; i < curves.size(); ++i) os << ",Q_" << (i + 1);
    os << '\n';
    char buf[32];
    for (double p : ps) {
        std::snprintf(buf, sizeof buf, "%.17g", p);
        os << buf;
        for (const auto& c : curves) {
            std::snprintf(buf, sizeof buf, "%.17g", c(p));
            os << ',' << buf;
        }
        os << '\n';
    }
    return os.str();
}

std::string cmd_verify(const Flags& f, bool& mismatch) {
    const auto cfg = load(f);
    const auto& X = need_loss(cfg);
    if (!X.is_discrete()) throw ConfigError("verify needs a discrete loss");
    auto [L, report] = pareto_solve(cfg.agents, X, cfg.options);
    const auto bf = brute_force_discrete({X, cfg.agents});
    const double diff = std::abs(report.objective - bf.objective);
    const bool comonotone = comonotone_check(L.payouts(X.as_discrete().atoms));
    const bool envelope_ok = std::abs(report.objective - report.envelope) <= 1e-9;
    mismatch = !(diff <= 1e-9) || !comonotone || !envelope_ok;
    Json out{{"solver_objective", report.objective},
             {"oracle_objective", bf.objective},
             {"difference", diff},
             {"envelope", report.envelope},
             {"comonotone", comonotone},
             {"match", !mismatch}};
    return io::dump(out);
}

void emit_error(std::ostream& err, const char* kind, const std::string& message) {
    err << io::dump(Json{{"error", kind}, {"message", message}}, 0) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pareto-optimal risk sharing with distortion risk measures"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "problem configuration (JSON)");
        sub->add_option("--grid", f.grid, "probability grid size");
        sub->add_option("--tie", f.tie, "tie rule")->check(CLI::IsMember({"lowest", "highest", "split"}));
        sub->add_option("--out", f.out, "output path (default stdout)");
        sub->add_option("--format", f.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    };
    auto* solve = app.add_subcommand("solve", "unconstrained Pareto solve");
    auto* constrained = app.add_subcommand("constrained", "Pareto solve under risk budgets");
    auto* buyer = app.add_subcommand("buyer", "single buyer under a regulator budget");
    auto* classify = app.add_subcommand("classify", "closed-form case for Exp loss and AVaR distortions");
    auto* curves = app.add_subcommand("curves", "risk-load curves on a probability grid");
    auto* verify = app.add_subcommand("verify", "compare the solver with brute-force enumeration");
    for (auto* s : {solve, constrained, buyer, curves, verify}) common(s);
    classify->add_option("--theta", f.theta)->required();
    classify->add_option("--b", f.b)->required();
    classify->add_option("--alpha", f.alpha)->required();
    classify->add_option("--beta", f.beta)->required();
    classify->add_option("--mu", f.mu)->required();
    classify->add_option("--B", f.B)->required();
    classify->add_option("--out", f.out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "invalid_input", e.what());
        return 3;
    }

    int code = 0;
    std::string text;
    try {
        if (solve->parsed()) {
            text = cmd_solve(f);
        } else if (constrained->parsed()) {
            text = cmd_constrained(f);
        } else if (buyer->parsed()) {
            text = cmd_buyer(f);
        } else if (classify->parsed()) {
            text = cmd_classify(f);
        } else if (curves->parsed()) {
            text = cmd_curves(f);
        } else {
            bool mismatch = false;
            text = cmd_verify(f, mismatch);
            code = mismatch ? 1 : 0;
        }
    } catch (const UnsolvableError& e) {
        emit_error(err, "unsolvable", e.what());
        return 2;
    } catch (const InfeasibleError& e) {
        emit_error(err, "infeasible", e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error(err, "invalid_input", e.what());
        return 3;
    }
    if (!text.empty() && text.back() != '\n') text += '\n';
    if (f.out.empty()) {
        out << text;
    } else {
        std::ofstream file(f.out);
        if (!file) {
            emit_error(err, "invalid_input", "cannot write " + f.out);
            return 3;
        }
        file << text;
    }
    return code;
}

}  // namespace riskshare
