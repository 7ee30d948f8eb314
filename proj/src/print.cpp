#include <sstream>

#include "tseries/series.hpp"

namespace tseries {

namespace {

bool simple(const std::string& s) {
    std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
    return s.find_first_of("+-*/ ", i) == std::string::npos;
}

std::string exponent_str(const ExponentScalar& e) {
    if (e.is_rational() && e.as_rational().get_den() == 1) return to_string(e.as_rational());
    return "(" + to_string(e) + ")";
}

std::string with_power(const std::string& base, const ExponentScalar& e) {
    if (e == ExponentScalar(1)) return base;
    return base + "^" + exponent_str(e);
}

std::string factor_str(const Factor& f) {
    ConstantSymbol s = SymbolTable::instance().get(f.sym);
    switch (s.kind) {
        case SymbolKind::Euler: return with_power("e", f.exp);
        case SymbolKind::Prime: return with_power(to_string(s.param), f.exp);
        case SymbolKind::LogPrime: return with_power("log(" + to_string(s.param) + ")", f.exp);
        case SymbolKind::Kappa: {
            std::string d = "(exp(" + to_string(s.param) + ")-1)";
            if (f.exp == ExponentScalar(1)) return "1/" + d;
            return d + "^" + exponent_str(-f.exp);
        }
    }
    return "?";
}

std::string product_str(const ConstantProduct& p) {
    std::string out;
    for (auto& f : p.factors) {
        if (!out.empty()) out += "*";
        out += factor_str(f);
    }
    return out;
}

// rational times the symbolic part; "" for the symbolic part means 1
std::string join_scaled(const Rational& r, const std::string& sym) {
    if (sym.empty()) return to_string(r);
    if (r == 1) return sym;
    if (r == -1) return "-" + sym;
    return to_string(r) + "*" + sym;
}

std::string key_str(const CoeffKey& k) {
    std::string out;
    auto add = [&](const std::string& s) {
        if (!out.empty()) out += "*";
        out += s;
    };
    auto& pt = ParamTable::instance();
    for (auto& [p, n] : k.params) add(with_power(pt.name(p), ExponentScalar(static_cast<long>(n))));
    if (k.sdeg) add(with_power("s", ExponentScalar(static_cast<long>(k.sdeg))));
    if (k.srate != 0) {
        if (k.srate == 1)
            add("exp(s)");
        else
            add("exp(" + to_string(k.srate) + "*s)");
    }
    if (!k.cp.empty()) add(product_str(k.cp));
    return out;
}

// joins signed pieces "a", "-b" as "a-b" (compact) or "a - b"
std::string join_signed(const std::vector<std::string>& parts, bool spaced) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        if (i == 0) {
            out += p;
        } else if (!p.empty() && p[0] == '-') {
            out += spaced ? " - " : "-";
            out += p.substr(1);
        } else {
            out += spaced ? " + " : "+";
            out += p;
        }
    }
    return out;
}

std::string coefficient_str(const Coefficient& c) {
    if (c.structurally_zero()) return "0";
    std::vector<std::string> parts;
    for (auto& t : c.terms()) parts.push_back(join_scaled(t.r, key_str(t.key)));
    return join_signed(parts, false);
}

std::string series_str(const Transseries& t, bool spaced);

std::string monomial_str(const Monomial& m) {
    std::string out;
    auto add = [&](const std::string& s) {
        if (!out.empty()) out += "*";
        out += s;
    };
    for (std::size_t d = 0; d < m.lp.size(); ++d) {
        if (m.lp[d].is_zero()) continue;
        std::string base = "x";
        for (std::size_t j = 0; j < d; ++j) base = "log(" + base + ")";
        add(with_power(base, m.lp[d]));
    }
    if (m.ex) {
        std::string e = series_str(-Registry::instance().get(m.ex), false);
        add(simple(e) ? "e^" + e : "e^(" + e + ")");
    }
    return out.empty() ? "1" : out;
}

std::string term_str(const Term& t) {
    std::string ms = t.m.is_one() ? "" : monomial_str(t.m);
    if (t.c.terms().size() == 1) {
        auto& ct = t.c.terms()[0];
        std::string ks = key_str(ct.key);
        if (ks.empty()) return join_scaled(ct.r, ms);
        if (ms.empty()) return join_scaled(ct.r, ks);
        return join_scaled(ct.r, ks + "*" + ms);
    }
    std::string cs = "(" + coefficient_str(t.c) + ")";
    return ms.empty() ? cs : cs + "*" + ms;
}

std::string series_str(const Transseries& t, bool spaced) {
    std::vector<std::string> parts;
    for (auto& term : t.terms()) parts.push_back(term_str(term));
    std::string out = parts.empty() ? "" : join_signed(parts, spaced);
    std::string b = to_string(t.bound());
    if (!b.empty()) out += out.empty() ? b : (spaced ? " + " : "+") + b;
    return out.empty() ? "0" : out;
}

}  // namespace

std::string to_string(const Coefficient& c) { return coefficient_str(c); }

std::string to_string(const ExponentScalar& e) {
    if (e.is_zero()) return "0";
    std::vector<std::string> parts;
    for (auto& c : e.coords()) parts.push_back(join_scaled(c.value, product_str(c.basis)));
    return join_signed(parts, false);
}

std::string to_string(const Monomial& m) { return monomial_str(m); }

std::string to_string(const Transseries& t) { return series_str(t, true); }

std::string to_string(const Bound& b) {
    if (b.exact()) return "";
    std::string out;
    if (b.cut()) out = "O(" + monomial_str(*b.cut()) + ")";
    for (auto& d : b.degrees()) {
        if (!out.empty()) out += " + ";
        out += "O(deg>" + to_string(d.max) + ")";
    }
    return out;
}

}  // namespace tseries
