#include <cctype>

#include "cli.hpp"

namespace tscli {

namespace {

struct Tok {
    enum Kind { Num, Id, Op, End } kind;
    std::string text;
    int col;
};

[[noreturn]] void syntax(int col, const std::string& what) {
    fail(ErrorKind::SyntaxError, "column " + std::to_string(col) + ": " + what);
}

std::vector<Tok> lex(const std::string& s) {
    std::vector<Tok> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char ch = s[i];
        int col = static_cast<int>(i) + 1;
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
                ++j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            }
            out.push_back({Tok::Num, s.substr(i, j - i), col});
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Tok::Id, s.substr(i, j - i), col});
            i = j;
        } else if (std::string("+-*/^()").find(ch) != std::string::npos) {
            out.push_back({Tok::Op, std::string(1, ch), col});
            ++i;
        } else {
            syntax(col, std::string("unexpected character '") + ch + "'");
        }
    }
    out.push_back({Tok::End, "", static_cast<int>(s.size()) + 1});
    return out;
}

Rational number(const std::string& t) {
    auto dot = t.find('.');
    if (dot == std::string::npos) return Rational(t, 10);
    std::string digits = t.substr(0, dot) + t.substr(dot + 1);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, t.size() - dot - 1);
    Rational r(mpz_class(digits, 10), den);
    r.canonicalize();
    return r;
}

std::optional<Coefficient> as_const(const Transseries& v) {
    if (!v.exact()) return std::nullopt;
    if (v.is_zero()) return Coefficient(0);
    if (v.size() == 1 && v.mag().is_one()) return v.dominant().c;
    return std::nullopt;
}

Transseries exp_of(const Transseries& v) {
    auto c = as_const(v);
    if (!c) return exp_series(v);
    Rational rate = 0;
    std::vector<CoeffTerm> rest;
    for (auto& t : c->terms()) {
        if (t.key.params.empty() && t.key.sdeg == 1 && t.key.srate == 0 && t.key.cp.empty())
            rate += t.r;
        else
            rest.push_back(t);
    }
    Coefficient k = Coefficient::from_terms(std::move(rest));
    if (!k.is_constant()) fail(ErrorKind::SemanticError, "exp of a coefficient with parameters");
    Coefficient out = exp_constant(k);
    if (rate != 0) out *= Coefficient::exp_s(rate);
    return Transseries(out);
}

Transseries pow_of(const Transseries& base, const Transseries& ex) {
    auto bc = as_const(base);
    if (bc && *bc == exp_constant(1)) return exp_of(ex);
    auto k = as_const(ex);
    if (!k) fail(ErrorKind::SemanticError, "exponent must be a constant");
    if (!k->is_constant()) fail(ErrorKind::SemanticError, "exponent must not contain parameters or s");
    ExponentScalar a = k->to_scalar();
    if (base.is_zero() && base.exact()) {
        if (sign_of(a) > 0) return base;
        fail(ErrorKind::SemanticError, "zero raised to a non-positive power");
    }
    if (base.exact() && base.size() == 1) {
        const Term& t = base.dominant();
        return Transseries::term(pow_coefficient(t.c, a), power(t.m, a));
    }
    return pow_real(base, a);
}

Transseries div_of(const Transseries& a, const Transseries& b) {
    if (auto bc = as_const(b)) return a.scale(invert_coefficient(*bc));
    if (b.exact() && b.size() == 1) return a.scale(invert_coefficient(b.dominant().c), inverse(b.mag()));
    return a * pow_real(b, ExponentScalar(-1));
}

class Parser {
public:
    Parser(const std::string& s, const Bindings& b) : t_(lex(s)), b_(b) {}

    Transseries run() {
        Transseries v = expr();
        if (peek().kind != Tok::End) syntax(peek().col, "unexpected '" + peek().text + "'");
        return v;
    }

private:
    std::vector<Tok> t_;
    std::size_t p_ = 0;
    const Bindings& b_;

    const Tok& peek() const { return t_[p_]; }
    bool is_op(const char* op) const { return peek().kind == Tok::Op && peek().text == op; }
    void expect(const char* op) {
        if (!is_op(op)) {
            if (peek().kind == Tok::End) syntax(peek().col, std::string("expected '") + op + "' before end of input");
            syntax(peek().col, std::string("expected '") + op + "', found '" + peek().text + "'");
        }
        ++p_;
    }

    template <class F>
    Transseries semantic(int col, F f) {
        try {
            return f();
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::SyntaxError || e.detail().rfind("column ", 0) == 0) throw;
            std::string what = e.kind() == ErrorKind::SemanticError ? e.detail() : std::string(kind_name(e.kind())) + ": " + e.detail();
            fail(ErrorKind::SemanticError, "column " + std::to_string(col) + ": " + what);
        }
    }

    Transseries expr() {
        Transseries v = term();
        while (is_op("+") || is_op("-")) {
            bool minus = peek().text == "-";
            ++p_;
            Transseries r = term();
            v = minus ? v - r : v + r;
        }
        return v;
    }

    Transseries term() {
        Transseries v = unary();
        while (is_op("*") || is_op("/")) {
            bool div = peek().text == "/";
            int col = peek().col;
            ++p_;
            Transseries r = unary();
            v = div ? semantic(col, [&] { return div_of(v, r); }) : v * r;
        }
        return v;
    }

    Transseries unary() {
        if (is_op("-")) {
            ++p_;
            return -unary();
        }
        return power();
    }

    Transseries power() {
        Transseries base = atom();
        if (!is_op("^")) return base;
        int col = peek().col;
        ++p_;
        Transseries ex = unary();
        return semantic(col, [&] { return pow_of(base, ex); });
    }

    Transseries call(const std::string& f, int col) {
        expect("(");
        Transseries a = expr();
        expect(")");
        return semantic(col, [&]() -> Transseries {
            if (f == "exp") return exp_of(a);
            if (f == "log") return log_series(a);
            if (f == "sqrt") return pow_of(a, Transseries(Rational(1, 2)));
            // O(m)
            if (!a.exact() || a.size() != 1) fail(ErrorKind::SemanticError, "O() takes a single monomial");
            return Transseries().with_bound(Bound::at(a.mag()));
        });
    }

    Transseries atom() {
        const Tok tok = peek();
        switch (tok.kind) {
            case Tok::Num: ++p_; return Transseries(number(tok.text));
            case Tok::Id: {
                ++p_;
                const std::string& n = tok.text;
                if (n == "exp" || n == "log" || n == "sqrt" || n == "O") {
                    if (!is_op("(")) syntax(peek().col, "expected '(' after " + n);
                    return call(n, tok.col);
                }
                if (is_op("(")) syntax(peek().col, "unknown function '" + n + "'");
                if (n == "x") return Transseries::x();
                if (n == "e") return Transseries(exp_constant(1));
                if (n == "s") return Transseries(Coefficient::s_var());
                auto it = b_.find(n);
                if (it != b_.end()) return Transseries(Coefficient(it->second));
                return Transseries(Coefficient::param(n));
            }
            case Tok::Op:
                if (tok.text == "(") {
                    ++p_;
                    Transseries v = expr();
                    expect(")");
                    return v;
                }
                syntax(tok.col, "unexpected '" + tok.text + "'");
            case Tok::End: syntax(tok.col, "unexpected end of input");
        }
        syntax(tok.col, "unexpected token");
    }
};

}  // namespace

Transseries parse(const std::string& text, const Bindings& params) { return Parser(text, params).run(); }

ExponentScalar parse_scalar(const std::string& text, const Bindings& params) {
    Transseries v = parse(text, params);
    auto c = as_const(v);
    if (!c || !c->is_constant()) fail(ErrorKind::SemanticError, "'" + text + "' is not a numeric constant");
    return c->to_scalar();
}

Monomial parse_monomial(const std::string& text, const Bindings& params) {
    Transseries v = parse(text, params);
    if (!v.exact() || v.size() != 1) fail(ErrorKind::SemanticError, "'" + text + "' is not a monomial");
    return v.mag();
}

Rational rational_arg(const std::string& text) {
    ExponentScalar a = parse_scalar(text);
    if (!a.is_rational()) fail(ErrorKind::SemanticError, "'" + text + "' is not rational");
    return a.as_rational();
}

}  // namespace tscli
