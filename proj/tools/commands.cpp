#include <functional>
#include <set>
#include <sstream>

#include "cli.hpp"

namespace tscli {

using nlohmann::json;

json SessionConfig::to_json() const {
    json j;
    j["cut"] = cut ? json(*cut) : json(nullptr);
    j["order"] = order;
    j["depth_cap"] = depth_cap;
    j["precision"] = precision;
    j["max_rounds"] = max_rounds;
    j["params"] = params;
    j["format"] = format;
    return j;
}

void SessionConfig::merge(const json& j) {
    if (j.contains("cut")) {
        if (j["cut"].is_null())
            cut.reset();
        else
            cut = j["cut"].get<std::string>();
    }
    if (j.contains("order")) order = j["order"].get<int>();
    if (j.contains("depth_cap")) depth_cap = j["depth_cap"].get<std::size_t>();
    if (j.contains("precision")) precision = j["precision"].get<long>();
    if (j.contains("max_rounds")) max_rounds = j["max_rounds"].get<std::size_t>();
    if (j.contains("params"))
        for (auto& [k, v] : j["params"].items()) params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    if (j.contains("format")) format = j["format"].get<std::string>();
    if (order < 0 || depth_cap == 0 || precision <= 0 || max_rounds == 0)
        fail(ErrorKind::SemanticError, "budgets must be positive");
}

void SessionConfig::apply() const {
    set_depth_cap(depth_cap);
    set_compare_precision(precision);
    set_max_rounds(max_rounds);
}

Bindings SessionConfig::bindings() const {
    Bindings b;
    for (auto& [k, v] : params) b[k] = rational_arg(v);
    return b;
}

// ---- machine format

namespace {

void collect_gens(const Transseries& t, std::vector<GenId>& order, std::set<GenId>& seen) {
    for (auto& term : t.terms()) {
        GenId id = term.m.ex;
        if (!id || seen.count(id)) continue;
        seen.insert(id);
        collect_gens(Registry::instance().get(id), order, seen);
        order.push_back(id);
    }
}

}  // namespace

std::vector<GenId> generators_of(const Transseries& t) {
    std::vector<GenId> order;
    std::set<GenId> seen;
    collect_gens(t, order, seen);
    return order;
}

json to_machine(const Transseries& t, const SessionConfig* cfg) {
    json j;
    j["terms"] = json::array();
    std::vector<GenId> order;
    std::set<GenId> seen;
    collect_gens(t, order, seen);
    if (t.bound().cut()) collect_gens(Transseries::term(1, *t.bound().cut()), order, seen);
    for (auto& term : t.terms()) {
        json lp = json::object();
        for (std::size_t d = 0; d < term.m.lp.size(); ++d)
            if (!term.m.lp[d].is_zero()) lp[std::to_string(d)] = to_string(term.m.lp[d]);
        j["terms"].push_back({{"coeff", to_string(term.c)}, {"logpart", lp}, {"exppart", term.m.ex}});
    }
    j["obound"] = to_string(t.bound());
    j["registry"] = json::array();
    for (GenId id : order) j["registry"].push_back({{"id", id}, {"series", to_string(Registry::instance().get(id))}});
    if (cfg) j["config"] = cfg->to_json();
    return j;
}

Transseries from_machine(const json& j) {
    std::map<GenId, Monomial> gens;
    for (auto& r : j.at("registry")) {
        Transseries L = parse(r.at("series").get<std::string>());
        gens[r.at("id").get<GenId>()] = intern_exponential(L).first;
    }
    std::vector<Term> ts;
    for (auto& t : j.at("terms")) {
        Monomial m = Monomial::one();
        for (auto& [d, a] : t.at("logpart").items()) {
            ExponentScalar e = parse_scalar(a.get<std::string>());
            std::size_t depth = std::stoul(d);
            m = m * (depth == 0 ? Monomial::x_pow(e) : Monomial::log_atom(depth, e));
        }
        GenId id = t.at("exppart").get<GenId>();
        if (id) {
            auto it = gens.find(id);
            if (it == gens.end()) fail(ErrorKind::SemanticError, "generator " + std::to_string(id) + " missing from registry");
            m = m * it->second;
        }
        Transseries c = parse(t.at("coeff").get<std::string>());
        if (!c.exact() || c.size() > 1 || (c.size() == 1 && !c.mag().is_one()))
            fail(ErrorKind::SemanticError, "coefficient is not a constant");
        if (!c.is_zero()) ts.push_back({m, c.dominant().c});
    }
    Bound b;
    std::string ob = j.value("obound", "");
    if (!ob.empty()) {
        if (ob.find("deg>") != std::string::npos)
            fail(ErrorKind::SemanticError, "degree bounds cannot be read back without their grading");
        b = parse(ob).bound();
    }
    return Transseries::from_terms(std::move(ts), b);
}

// ---- truncation

std::shared_ptr<Grading> default_grading(const Transseries& T) {
    std::set<Rational> ps;
    std::function<void(const Transseries&)> walk = [&](const Transseries& t) {
        for (auto& term : t.terms()) {
            if (!term.m.ex) continue;
            const Transseries& L = Registry::instance().get(term.m.ex);
            for (auto& u : L.terms()) {
                if (!u.m.ex && u.m.lp.size() == 1 && u.m.lp[0].is_rational() && u.m.lp[0].as_rational() > 0)
                    ps.insert(u.m.lp[0].as_rational());
            }
            walk(L);
        }
    };
    walk(T);
    if (!ps.empty()) ps.insert(1);
    auto g = std::make_shared<Grading>();
    g->depth_w = {1};
    for (auto& p : ps) g->gen_w.push_back({Monomial::x_pow(p), 2 * p});
    return g;
}

namespace {
bool near_identity(const Transseries& T) {
    return !T.is_zero() && T.mag() == Monomial::x_pow(1) && T.dominant().c == Coefficient(1);
}
}  // namespace

Bound session_bound(const SessionConfig& cfg, const Transseries& T) {
    if (cfg.cut) return Bound::at(parse_monomial(*cfg.cut, cfg.bindings()));
    if (near_identity(T)) return Bound::degree(default_grading(T), cfg.order_or(4));
    return Bound::at(Monomial::x_pow(-cfg.order_or(4)));
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::OrderUndecidable:
        case ErrorKind::SignUndecidable:
        case ErrorKind::Unstabilized: return Undecidable;
        case ErrorKind::BudgetExhausted:
        case ErrorKind::DepthCapExceeded:
        case ErrorKind::TruncationTooCoarse:
        case ErrorKind::NoProgress: return Budget;
        case ErrorKind::SyntaxError:
        case ErrorKind::SemanticError:
        case ErrorKind::UnboundParameter:
        case ErrorKind::ZeroSeries:
        case ErrorKind::NonInvertibleCoefficient:
        case ErrorKind::NonConstantLeadingCoefficient:
        case ErrorKind::NegativeBase:
        case ErrorKind::ConstantNotRepresentable:
        case ErrorKind::LogConstantNotDeclared: return InputError;
        default: return Rejected;
    }
}

// ---- commands

Output guarded(const SessionConfig& cfg, const std::function<void(Output&)>& f) {
    Output out;
    try {
        cfg.apply();
        f(out);
    } catch (const Error& e) {
        out.code = exit_code(e.kind());
        if (out.error.empty()) out.error = e.what();
    } catch (const std::exception& e) {
        out.code = InputError;
        out.error = e.what();
    }
    return out;
}

void emit(Output& out, const SessionConfig& cfg, const std::string& name, const Transseries& t) {
    out.text += name + " = " + to_string(t) + "\n";
    json j = to_machine(t, &cfg);
    j["name"] = name;
    out.machine.push_back(j);
}

Transseries parse_input(const SessionConfig& cfg, const std::string& expr) {
    Bindings b = cfg.bindings();
    try {
        return parse(expr, b);
    } catch (const Error& e) {
        if (e.detail().find("TruncationTooCoarse") == std::string::npos) throw;
    }
    // infinite expansions such as 1/(x+1) are cut where the session cuts
    Monomial cut = cfg.cut ? parse_monomial(*cfg.cut, b) : Monomial::x_pow(-cfg.order_or(4));
    TruncScope ts(Bound::at(cut));
    return parse(expr, b);
}

namespace {

std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::string describe(const Classification& c) {
    std::ostringstream os;
    os << lower(kind_name(c.kind)) << "; first ratio (" << to_string(c.a) << ", " << to_string(c.e) << ")";
    if (c.kind == Kind::Moderate) {
        os << "; witnesses:";
        for (std::size_t i = 0; i < c.witnesses.size(); ++i)
            os << (i ? ", " : " ") << to_string(c.witnesses[i].g) << " (b=" << to_string(c.witnesses[i].b) << ")";
    } else if (c.kind == Kind::Deep && !c.witnesses.empty()) {
        os << "; witness " << to_string(c.witnesses[0].g);
    }
    if (c.purely_deep) os << "; purely deep";
    return os.str();
}

}  // namespace

Output cmd_classify(const SessionConfig& cfg, const std::string& expr) {
    return guarded(cfg, [&](Output& out) {
        Transseries T = parse_input(cfg, expr);
        json j{{"command", "classify"}};
        if (near_identity(T) && !cfg.cut) {
            Classification c = classify(T);
            out.text = describe(c) + "\n";
            j["conjugations"] = 0;
            j["kind"] = lower(kind_name(c.kind));
        } else {
            Bound b = session_bound(cfg, T);
            TruncScope ts(b);
            ExtendedClass ec = classify_extended(T);
            std::string pre = ec.k ? "after " + std::to_string(ec.k) + " conjugation" + (ec.k > 1 ? "s" : "") + ": " : "";
            std::string post = b.exact() ? "" : " [above " + to_string(ec.conj.bound()) + "]";
            out.text = pre + describe(ec.c) + post + "\n";
            j["conjugations"] = ec.k;
            j["kind"] = lower(kind_name(ec.c.kind));
            j["conjugate"] = to_machine(ec.conj, &cfg);
        }
        j["text"] = out.text.substr(0, out.text.size() - 1);
        out.machine.push_back(j);
    });
}

Output cmd_group(const SessionConfig& cfg, const std::string& expr) {
    return guarded(cfg, [&](Output& out) {
        Transseries T = parse_input(cfg, expr);
        if (!near_identity(T)) fail(ErrorKind::NotNearIdentity, "group needs a series ~ x; use iterate");
        Classification c = classify(T);
        if (c.kind == Kind::Deep) {
            out.error = "deep: no common-support iteration group; witness " + to_string(c.witnesses.at(0).g);
            fail(ErrorKind::DeepNoCommonSupport, out.error);
        }
        IterationGroup G = build_group(T, session_bound(cfg, T));
        for (std::size_t i = 0; i < G.support.size(); ++i)
            out.text += "alpha[" + to_string(G.support[i]) + "] = " + to_string(G.alpha[i]) + "\n";
        emit(out, cfg, "Phi(s, x)", group_series(G));
    });
}

Output cmd_iterate(const SessionConfig& cfg, const std::string& expr, const std::string& s) {
    return guarded(cfg, [&](Output& out) {
        Bindings b = cfg.bindings();
        Transseries T = parse_input(cfg, expr);
        ExponentScalar s0 = parse_scalar(s, b);
        emit(out, cfg, "T^[" + to_string(s0) + "]", frac_iterate(T, s0, session_bound(cfg, T)));
    });
}

Output cmd_abel(const SessionConfig& cfg, const std::string& expr) {
    return guarded(cfg, [&](Output& out) {
        Transseries T = parse_input(cfg, expr);
        AbelResult r = abel_general(T, session_bound(cfg, T));
        out.text += "conjugations: " + std::to_string(r.k) + "\n";
        if (r.k) emit(out, cfg, "conjugate", r.conj);
        out.text += "tau = " + to_string(r.tau) + "\n";
        emit(out, cfg, "V", r.V);
    });
}

Output cmd_inverse(const SessionConfig& cfg, const std::string& expr) {
    return guarded(cfg, [&](Output& out) {
        Transseries T = parse_input(cfg, expr);
        TruncScope ts(session_bound(cfg, T));
        emit(out, cfg, "T^[-1]", compose_inverse(T));
    });
}

Output cmd_compose(const SessionConfig& cfg, const std::string& a, const std::string& b) {
    return guarded(cfg, [&](Output& out) {
        Transseries A = parse_input(cfg, a), B = parse_input(cfg, b);
        TruncScope ts(session_bound(cfg, A));
        emit(out, cfg, "A o B", compose(A, B));
    });
}

double to_double(const ExponentScalar& e) {
    Interval i = e.enclose(128);
    return (i.lo().to_double() + i.hi().to_double()) / 2;
}

}  // namespace tscli
