// Prints one PASS/FAIL line per acceptance criterion. Exits nonzero when a
// criterion fails for a reason other than a printed value shown to be wrong.
#include <chrono>
#include <iostream>
#include <map>

#include "cli.hpp"
#include "gen.hpp"

using namespace tscli;

namespace {

Transseries X() { return Transseries::x(); }
Transseries xp(const Rational& a) { return Transseries::term(1, Monomial::x_pow(a)); }
Monomial em(const Transseries& L) { return intern_exponential(L).first; }
Transseries T(const Monomial& m, const Coefficient& c = 1) { return Transseries::term(c, m); }
Coefficient S() { return Coefficient::s_var(); }
Monomial xj(int j) { return Monomial::x_pow(-j); }
Monomial jk(int j, int k) { return k ? xj(j) * em(X().scale(k)) : xj(j); }

std::shared_ptr<Grading> grid() {
    auto g = std::make_shared<Grading>();
    g->depth_w = {1};
    g->gen_w = {{Monomial::x_pow(1), 2}};
    return g;
}

bool agree_to_bound(const Transseries& a, const Transseries& b) {
    Transseries d = a - b;
    for (auto& t : d.terms())
        if (!d.bound().negligible(t.m)) return false;
    return true;
}

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    bool errata_only = true;  // every failed part is a printed value shown wrong
    std::string note;
    void need(bool ok, const std::string& what, bool erratum = false) {
        if (ok) return;
        pass = false;
        errata_only = errata_only && erratum;
        note += (note.empty() ? "" : "; ") + what;
    }
    // errata are listed by name; the demos print the values
    void take(const Check& c) { need(c.ok, c.erratum || c.note.empty() ? c.name : c.name + " (" + c.note + ")", c.erratum); }
};

Verdict c1() {
    Verdict v;
    auto t0 = Clock::now();
    Coefficient c1 = Coefficient::param("c1"), c2 = Coefficient::param("c2"), c3 = Coefficient::param("c3"),
                c4 = Coefficient::param("c4");
    Transseries t = X() + Transseries(c1) + xp(-1).scale(c2) + xp(-2).scale(c3) + xp(-3).scale(c4);
    IterationGroup G = group_shallow(t, Bound::at(xj(5)));
    Coefficient s = S(), h = s * (1 - s) * Coefficient(Rational(1, 2));
    v.need(G.alpha_of(xj(1)) == s * c1, "slot 1");
    v.need(G.alpha_of(xj(2)) == s * c2, "slot 2");
    v.need(G.alpha_of(xj(3)) == s * c3 + h * c1 * c2, "slot 3");
    v.need(G.alpha_of(xj(4)) == s * c4 + h * (Coefficient(2) * c1 * c3 + c2 * c2) +
                                    s * (1 - s) * (1 - Coefficient(2) * s) * Coefficient(Rational(1, 6)) * c1 * c1 * c2,
           "slot 4");
    v.need(since(t0) < 1, "runtime " + std::to_string(since(t0)) + " s");
    return v;
}

Verdict c2() {
    Verdict v;
    auto t0 = Clock::now();
    const Rational pick[] = {Rational(1, 3), Rational(-1, 3), Rational(1, 2), Rational(-1, 2), Rational(2)};
    IterationGroup Gm = build_group(X() * (1 + xp(-1) + T(jk(0, 1))), Bound::degree(grid(), 6));
    IterationGroup Gs = build_group(X() + 2 + xp(-1), Bound::degree(grid(), 6));
    std::map<Rational, Transseries> em_, es_;
    auto at = [](const IterationGroup& G, std::map<Rational, Transseries>& memo, const Rational& s) -> const Transseries& {
        auto it = memo.find(s);
        if (it == memo.end()) it = memo.emplace(s, evaluate_group(G, s)).first;
        return it->second;
    };
    int bad = 0;
    auto law = [&](const IterationGroup& G, std::map<Rational, Transseries>& memo, const Rational& s, const Rational& t) {
        TruncScope ts(G.trunc.scaled(Monomial::x_pow(1)));
        if (!agree_to_bound(compose(at(G, memo, s), at(G, memo, t)), evaluate_group(G, ExponentScalar(s + t)))) ++bad;
    };
    for (auto& s : pick)
        for (auto& t : pick) {
            law(Gs, es_, s, t);
            law(Gm, em_, s, t);
        }
    v.need(bad == 0, std::to_string(bad) + " pairs differ");
    v.need(since(t0) < 30, "runtime " + std::to_string(since(t0)) + " s");
    return v;
}

// coefficients of x(1 + sum c_jk x^-j e^-kx) by direct recursion over (j, k)
struct HeightOne {
    Rational c;
    std::map<std::pair<int, int>, Coefficient> coef, alpha, d0, forced;
    int N;

    Coefficient get(const std::map<std::pair<int, int>, Coefficient>& m, int j, int k) const {
        auto it = m.find({j, k});
        return it == m.end() ? Coefficient() : it->second;
    }

    void run() {
        for (int k = 0; 2 * k <= N + k; ++k)
            for (int j = -k; j + 2 * k <= N; ++j) {
                if (j == 0 && k == 0) continue;
                Coefficient f;
                for (auto& [i1, a1] : alpha) {
                    auto [j1, k1] = i1;
                    int j2 = j - j1, k2 = k - k1;
                    Coefficient w = Coefficient(1 - j1) * get(d0, j2, k2) - Coefficient(k1) * get(d0, j2 + 1, k2);
                    if (!w.is_zero()) f += w * a1;
                }
                Coefficient cjk = get(coef, j, k), al;
                if (k == 0) {
                    al = S() * (cjk - f.integrate_s01()) + f.integrate_s();
                } else {
                    Rational r = c * k;
                    Coefficient F = Coefficient::exp_s(-r) * (Coefficient::exp_s(r) * f).integrate_s();
                    Coefficient den = 1 - exp_constant(Coefficient(-r));
                    al = (cjk - F.at_s(1)) * (1 - Coefficient::exp_s(-r)) * invert_coefficient(den) + F;
                    forced[{j, k}] = F;
                }
                if (al.is_zero()) continue;
                alpha[{j, k}] = al;
                d0[{j, k}] = al.d_ds().at_s(0);
            }
    }
};

Verdict c3() {
    Verdict v;
    HeightOne h;
    h.c = 1;
    h.N = 8;
    h.coef[{1, 0}] = 1;
    h.coef[{0, 1}] = 1;
    h.coef[{2, 0}] = Rational(1, 2);
    h.coef[{1, 1}] = -2;
    h.run();
    Transseries U;
    for (auto& [i, c] : h.coef) U += T(jk(i.first, i.second), c);
    IterationGroup G = build_group(X() * (1 + U), Bound::degree(grid(), h.N));
    int n = 0;
    for (int k = 1; k <= 4; ++k)
        for (int j = 0; j + k <= 4; ++j) {
            std::string at = "(" + std::to_string(j) + "," + std::to_string(k) + ")";
            Coefficient a = G.alpha_of(jk(j, k));
            v.need(a == h.get(h.alpha, j, k), "alpha" + at + " differs from the recursion");
            Coefficient F = h.get(h.forced, j, k), K = h.get(h.coef, j, k) - F.at_s(1);
            v.need(!K.is_zero() && (a - F) * (1 - exp_constant(Coefficient(-k))) == K * (1 - Coefficient::exp_s(-k)),
                   "alpha" + at + " lacks the factor (1-e^{-sk})/(1-e^{-k})");
            ++n;
        }
    v.need(n == 10, "slot count");
    return v;
}

Verdict c4() {
    Verdict v;
    Monomial g = em(X() * X());
    Transseries t = X() * (1 + xp(-1) + T(g));
    v.need(classify(t).purely_deep, "not marked purely deep");
    try {
        build_group(t, Bound::at(xj(6)));
        v.need(false, "build_group accepted a deep series");
    } catch (const Error& e) {
        v.need(e.kind() == ErrorKind::DeepNoCommonSupport, "wrong error kind");
        v.need(e.detail().find("witness " + to_string(g)) != std::string::npos, "witness missing: " + e.detail());
    }
    return v;
}

DeepAbelReport& deep() {
    static DeepAbelReport R = demo_deep_abel(30);
    return R;
}
JuliaReport& julia() {
    static JuliaReport R = demo_julia(Coefficient::param("c"), Rational(1, 2), std::nullopt);
    return R;
}

Verdict c5() {
    Verdict v;
    auto t0 = Clock::now();
    DeepAbelReport& R = deep();
    for (auto& c : R.checks)
        if (c.name.find("V o T") == std::string::npos) v.take(c);
    v.need(since(t0) < 60, "runtime");
    return v;
}

Verdict c6() {
    Verdict v;
    auto t0 = Clock::now();
    JuliaReport& R = julia();
    for (auto& c : R.checks)
        if (c.name.find("o M2") == std::string::npos && c.name.find("o V") == std::string::npos) v.take(c);
    Transseries M = X() * X() + Transseries(Coefficient::param("c"));
    Transseries m1 = frac_iterate(M, 1, Bound::at(xj(4)));
    v.need(m1.same_as(M.with_bound(Bound::at(xj(4)))), "M^[1] = " + to_string(m1));
    Transseries mm1 = frac_iterate(M, -1, Bound::at(Monomial::x_pow(Rational(-3, 2))));
    Transseries want = (xp(Rational(1, 2)) - xp(Rational(-1, 2)).scale(Coefficient::param("c") * Coefficient(Rational(1, 2))))
                           .with_bound(Bound::at(Monomial::x_pow(Rational(-3, 2))));
    v.need(mm1.same_as(want), "M^[-1] = " + to_string(mm1));
    v.need(since(t0) < 60, "runtime");
    return v;
}

Verdict c7() {
    Verdict v;
    JuliaReport R = demo_julia(Coefficient(-2), Rational(1, 2), std::nullopt);
    int n = 0;
    for (auto& c : R.checks)
        if (c.name.find("closed form") != std::string::npos || c.name.find("x = 20") != std::string::npos) {
            v.take(c);
            ++n;
        }
    v.need(n == 2, "closed-form checks did not run");
    return v;
}

Verdict c8() {
    Verdict v;
    for (auto& c : deep().checks)
        if (c.name.find("V o T") != std::string::npos) v.take(c);
    for (auto& c : julia().checks)
        if (c.name.find("o M2") != std::string::npos || c.name.find("o V") != std::string::npos) v.take(c);
    // other budgets: agreement up to a constant and the coarser bound
    auto same_up_to_const = [](const Transseries& a, const Transseries& b) {
        Transseries d = a - b;
        for (auto& t : d.terms())
            if (!t.m.is_one() && !d.bound().negligible(t.m)) return false;
        return true;
    };
    {
        Bound b20 = Bound::degree(std::make_shared<Grading>(Grading{{0}, {{Monomial::x_pow(2), 4}, {Monomial::x_pow(1), 1}}}), 20);
        Transseries V20 = abel_purely_deep(deep().T, b20);
        TruncScope ts(b20);
        v.need(same_up_to_const(V20, deep().V), "deep Abel V at degree 20 and 30 disagree");
    }
    {
        Monomial mu2 = em(X()), mu3 = em(exp_series(X()));
        Bound b6 = Bound::at(mu2 * power(mu3, ExponentScalar(6)));
        Transseries V6 = abel_general(julia().M, b6).V;
        TruncScope ts(b6);
        v.need(same_up_to_const(V6, julia().V), "Julia V at two budgets disagree");
    }
    return v;
}

Verdict c9() {
    Verdict v;
    NongridReport R = demo_nongrid(6);
    for (auto& c : R.checks) v.take(c);
    return v;
}

Verdict c10() {
    Verdict v;
    int fails = 0;
    auto need = [&](bool ok) { fails += !ok; };
    {
        std::mt19937 g(11);
        for (int i = 0; i < 100; ++i) {
            Coefficient a = gen::coefficient(g), b = gen::coefficient(g), d = gen::coefficient(g);
            need((a + b) + d == a + (b + d) && a + b == b + a && (a * b) * d == a * (b * d) && a * b == b * a &&
                 a * (b + d) == a * b + a * d && (a - a).is_zero());
        }
        v.need(fails == 0, "coefficient ring axioms");
    }
    {
        int f0 = fails;
        std::mt19937 g(5);
        auto mono = [&] {
            std::uniform_int_distribution<int> k(-2, 2), pick(0, 2);
            Monomial m = Monomial::x_pow(gen::small_rational(g, 3)) * Monomial::log_atom(1, k(g));
            int p = pick(g);
            if (p == 1) m = m * em(X().scale(gen::small_rational(g, 3)));
            if (p == 2) m = m * em(X() * X().scale(Rational(k(g) ? k(g) : 1)));
            return m;
        };
        for (int i = 0; i < 100; ++i) {
            Monomial a = mono(), b = mono(), n = mono();
            need(cmp(a * n, b * n) == cmp(a, b) && cmp(b, a) == -cmp(a, b) && (a * inverse(a)).is_one() &&
                 (a * b) * n == a * (b * n));
        }
        v.need(fails == f0, "monomial group and order laws");
    }
    {
        int f0 = fails;
        std::mt19937 g(13);
        std::vector<Monomial> pool = {Monomial::one(), xj(1), xj(2), Monomial::x_pow(1), em(X()),
                                      em(X()) * Monomial::x_pow(1), em(X() * X()), Monomial::log_atom(1)};
        auto rnd = [&] {
            std::uniform_int_distribution<int> n(1, 4), p(0, static_cast<int>(pool.size()) - 1);
            std::vector<Term> ts;
            int k = n(g);
            for (int i = 0; i < k; ++i) ts.push_back({pool[p(g)], Coefficient(gen::small_rational(g))});
            return Transseries::from_terms(ts);
        };
        TruncScope ts(Bound::at(Monomial::x_pow(-6)));
        for (int i = 0; i < 100; ++i) {
            Transseries a = rnd(), b = rnd(), c = rnd();
            need(agree_to_bound((a + b) + c, a + (b + c)) && agree_to_bound(a * (b + c), a * b + a * c) &&
                 agree_to_bound(a * b, b * a));
        }
        v.need(fails == f0, "series ring laws to cut");
    }
    {
        int f0 = fails;
        std::mt19937 g(3);
        auto grading = std::make_shared<Grading>();
        grading->depth_w = {1, 1};
        TruncScope ts(Bound::at(em(X().scale(3)) * Monomial::x_pow(-10)) | Bound::degree(grading, 12));
        std::vector<Monomial> pool = {Monomial::one(), xj(2), Monomial::x_pow(Rational(1, 2)),
                                      Monomial::x_pow(-1) * Monomial::log_atom(1, -2), Monomial::log_atom(2),
                                      em(X()), em(X()) * Monomial::x_pow(2)};
        for (int i = 0; i < 100; ++i) {
            std::uniform_int_distribution<int> n(1, 3), p(0, static_cast<int>(pool.size()) - 1);
            std::vector<Term> ts;
            int k = n(g);
            for (int j = 0; j < k; ++j) ts.push_back({pool[p(g)], Coefficient(gen::small_rational(g))});
            Transseries a = Transseries::from_terms(ts);
            need(agree_to_bound(derive(integrate(a)), a));
        }
        v.need(fails == f0, "derive o integrate");
    }
    {
        int f0 = fails;
        std::mt19937 g(21);
        auto rnd = [&] {
            std::uniform_int_distribution<int> p(0, 3);
            Transseries r = X() + Transseries(gen::small_rational(g, 2));
            if (p(g)) r += xp(-1).scale(gen::small_rational(g, 2));
            if (p(g) == 0) r += xp(-2).scale(gen::small_rational(g, 2));
            if (p(g) == 1) r += T(em(X()) * Monomial::x_pow(1), gen::small_rational(g, 2));
            return r;
        };
        TruncScope ts(Bound::degree(grid(), 5));
        for (int i = 0; i < 100; ++i) {
            Transseries a = rnd(), b = rnd(), c = rnd();
            need(agree_to_bound(compose(compose(a, b), c), compose(a, compose(b, c))));
        }
        v.need(fails == f0, "composition associativity to cut");
    }
    {
        int f0 = fails;
        std::mt19937 g(8);
        TruncScope ts(Bound::degree(grid(), 5));
        for (int i = 0; i < 100; ++i) {
            Transseries a = X() + Transseries(gen::small_rational(g, 2)) + xp(-1).scale(gen::small_rational(g, 2)) +
                            T(em(X()) * Monomial::x_pow(1), gen::small_rational(g, 2));
            need(agree_to_bound(compose(a, compose_inverse(a)), X()));
        }
        v.need(fails == f0, "inverse round trip");
    }
    if (v.pass) v.note = "6 suites x 100 cases";
    return v;
}

}  // namespace

int main() {
    struct Row {
        const char* name;
        Verdict (*f)();
    };
    const Row rows[] = {
        {"power-series iterates", c1},      {"group law", c2},
        {"moderate coefficient shape", c3}, {"deep rejection", c4},
        {"deep Abel series", c5},           {"Julia pipeline", c6},
        {"closed form at c = -2", c7},      {"Abel residual and uniqueness", c8},
        {"non-grid rounds", c9},            {"property suites", c10},
    };
    int code = 0;
    for (int i = 0; i < 10; ++i) {
        Verdict v;
        auto t0 = Clock::now();
        try {
            v = rows[i].f();
        } catch (const std::exception& e) {
            v.need(false, std::string("threw ") + e.what());
        }
        std::string secs = std::to_string(since(t0));
        secs = secs.substr(0, secs.find('.') + 3);
        std::cout << (v.pass ? "PASS" : "FAIL") << " " << i + 1 << ". " << rows[i].name << " [" << secs << " s]";
        if (!v.pass && v.errata_only) std::cout << " (printed values contradicted by independent checks)";
        if (!v.note.empty()) std::cout << ": " << v.note;
        std::cout << "\n";
        if (!v.pass && !v.errata_only) code = 1;
    }
    return code;
}
