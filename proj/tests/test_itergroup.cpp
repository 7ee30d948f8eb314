#include <chrono>
#include <map>

#include "doctest.h"
#include "gen.hpp"
#include "tseries/itergroup.hpp"

using namespace tseries;

namespace {
Transseries X() { return Transseries::x(); }
Transseries xp(const Rational& a) { return Transseries::term(1, Monomial::x_pow(a)); }
Monomial em(const Transseries& L) { return intern_exponential(L).first; }
Transseries T(const Monomial& m, const Coefficient& c = 1) { return Transseries::term(c, m); }
Coefficient P(const char* n) { return Coefficient::param(n); }
Coefficient S() { return Coefficient::s_var(); }
Monomial xj(int j) { return Monomial::x_pow(-j); }
// x^-j e^-kx
Monomial jk(int j, int k) { return k ? xj(j) * em(X().scale(k)) : xj(j); }

std::shared_ptr<Grading> grid(int xw = 2) {
    auto g = std::make_shared<Grading>();
    g->depth_w = {1};
    g->gen_w = {{Monomial::x_pow(1), xw}};
    return g;
}

void check_to_bound(const Transseries& a, const Transseries& b) {
    Transseries d = a - b;
    for (auto& t : d.terms()) {
        INFO(to_string(t.m), " ", to_string(t.c));
        CHECK(d.bound().negligible(t.m));
    }
}
}  // namespace

TEST_CASE("power series iterates") {
    auto t0 = std::chrono::steady_clock::now();
    Coefficient c1 = P("c1"), c2 = P("c2"), c3 = P("c3"), c4 = P("c4");
    Transseries t = X() + Transseries(c1) + xp(-1).scale(c2) + xp(-2).scale(c3) + xp(-3).scale(c4);
    IterationGroup G = group_shallow(t, Bound::at(xj(5)));
    Coefficient s = S(), h = s * (1 - s) * Coefficient(Rational(1, 2));
    CHECK(G.alpha_of(xj(1)) == s * c1);
    CHECK(G.alpha_of(xj(2)) == s * c2);
    CHECK(G.alpha_of(xj(3)) == s * c3 + h * c1 * c2);
    CHECK(G.alpha_of(xj(4)) == s * c4 + h * (Coefficient(2) * c1 * c3 + c2 * c2) +
                                   s * (1 - s) * (1 - Coefficient(2) * s) * Coefficient(Rational(1, 6)) * c1 * c1 * c2);
    CHECK(G.support.size() == 4);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 1.0);
}

TEST_CASE("support closure") {
    // (x x^-1)' = 0: x^-1 alone generates nothing
    CHECK(closure_support({xj(1)}, Bound::at(xj(6))).size() == 1);
    auto B = closure_support({xj(1), xj(2)}, Bound::at(xj(6)));
    REQUIRE(B.size() == 5);
    for (int j = 1; j <= 5; ++j) CHECK(B[j - 1] == xj(j));
    CHECK(closure_support(B, Bound::at(xj(6))) == B);

    auto g = grid();
    Bound b = Bound::degree(g, 5);
    auto M = closure_support({xj(1), jk(0, 1)}, b);
    for (auto& m : M) CHECK_FALSE(b.negligible(m));
    CHECK(std::find(M.begin(), M.end(), jk(-1, 2)) != M.end());
    CHECK(std::find(M.begin(), M.end(), xj(2)) == M.end());
    CHECK(closure_support(M, b) == M);
    for (std::size_t i = 1; i < M.size(); ++i) CHECK(cmp(M[i - 1], M[i]) > 0);
}

TEST_CASE("pairs") {
    std::vector<Monomial> B{xj(1), xj(2)};
    // (x x^-1)' = 0, so x^-1 never contributes through g1
    auto p = pairs_for(xj(3), B);
    REQUIRE(p.size() == 1);
    CHECK(p[0].g1 == xj(2));
    CHECK(p[0].g2 == xj(1));
    CHECK(p[0].w == Coefficient(-1));
    CHECK(pairs_for(xj(2), B).empty());
    CHECK(pairs_for(Monomial::x_pow(1), B).empty());

    auto M = closure_support({xj(1), jk(0, 1)}, Bound::degree(grid(), 4));
    int brute = 0, listed = 0;
    for (auto& g : M) {
        listed += static_cast<int>(pairs_for(g, M).size());
        for (auto& g1 : M)
            for (auto& g2 : M) {
                // (x g1)' g2 by the product rule, independently of pairs_for
                Transseries d = derive(T(Monomial::x_pow(1) * g1)) * T(g2);
                if (!d.coeff_of(g).is_zero()) ++brute;
            }
    }
    CHECK(listed == brute);
    CHECK(listed > 0);
}

TEST_CASE("group endpoints and identity") {
    Transseries t = X() + 2 + xp(-1);
    Bound b = Bound::at(xj(7));
    IterationGroup G = build_group(t, b);
    CHECK(evaluate_group(G, 0).same_as(X().with_bound(b.scaled(Monomial::x_pow(1)))));
    check_to_bound(evaluate_group(G, 1), t);
    for (std::size_t i = 0; i < G.support.size(); ++i) CHECK(G.alpha[i].at_s(0).is_zero());
    CHECK(G.support.front() == G.e);
    CHECK(G.alpha.front() == S() * G.a);

    IterationGroup I = build_group(X(), b);
    CHECK(I.identity);
    CHECK(evaluate_group(I, Rational(1, 2)).same_as(X().with_bound(b.scaled(Monomial::x_pow(1)))));

    {
        TruncScope ts(b.scaled(Monomial::x_pow(1)));
        Transseries h = evaluate_group(G, Rational(1, 2));
        check_to_bound(compose(h, h), t);
    }
}

TEST_CASE("moderate groups") {
    Monomial ex = jk(0, 1);
    auto g = grid();
    Bound b = Bound::degree(g, 5);
    Transseries t = X() * (1 + xp(-1) + T(ex) + T(jk(1, 1)));
    IterationGroup G = group_moderate(t, b);
    CHECK(G.cls.kind == Kind::Moderate);
    for (std::size_t i = 0; i < G.support.size(); ++i) {
        CHECK(G.alpha[i].at_s(0).is_zero());
        CHECK(G.alpha[i].at_s(1) == t.scale(1, Monomial::x_pow(-1)).coeff_of(G.support[i]));
    }
    // leading e^-x slot: (1 - e^-s)/(1 - e^-1)
    Coefficient e1 = exp_constant(Coefficient(-1));
    CHECK(G.alpha_of(ex) * (1 - e1) == 1 - Coefficient::exp_s(-1));
    CHECK_THROWS_WITH_AS(group_shallow(t, b), doctest::Contains("WrongClass"), Error);

    IterationGroup Sg = group_moderate(X() * (1 + xp(-1)), Bound::at(xj(4)));
    CHECK(Sg.alpha_of(xj(1)) == S());
    for (auto& a : Sg.alpha) CHECK_FALSE(a.has_kappa());

    TruncScope ts(b.scaled(Monomial::x_pow(1)));
    check_to_bound(compose(evaluate_group(G, 1), evaluate_group(G, 1)), compose(t, t));
}

namespace {
// The (j,k) recursion for x (sum c_jk x^-j e^-kx) with c = c_{1,0} != 0, written
// directly over integer indices. Indices may have j < 0 once k > 0.
struct HeightOne {
    Rational c;
    std::map<std::pair<int, int>, Coefficient> coef, alpha, d0, forced;
    int N;  // keep j + 2k <= N

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
                    if (j1 == j && k1 == k) continue;
                    Coefficient w = Coefficient(1 - j1) * get(d0, j2, k2) - Coefficient(k1) * get(d0, j2 + 1, k2);
                    if (!w.is_zero()) f += w * a1;
                }
                Coefficient cjk = get(coef, j, k), al;
                if (k == 0) {
                    al = S() * (cjk - f.integrate_s01()) + f.integrate_s();
                } else {
                    Rational r = c * k;
                    Coefficient F = Coefficient::exp_s(-r) * (Coefficient::exp_s(r) * f).integrate_s();
                    Coefficient F1 = F.at_s(1);
                    Coefficient den = 1 - exp_constant(Coefficient(-r));
                    al = (cjk - F1) * (1 - Coefficient::exp_s(-r)) * invert_coefficient(den) + F;
                    forced[{j, k}] = F;
                }
                if (al.is_zero()) continue;
                alpha[{j, k}] = al;
                d0[{j, k}] = al.d_ds().at_s(0);
            }
    }
};
}  // namespace

TEST_CASE("moderate coefficients against the index recursion") {
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
    Transseries t = X() * (1 + U);
    IterationGroup G = build_group(t, Bound::degree(grid(), h.N));
    int checked = 0;
    for (int k = 1; k <= 4; ++k)
        for (int j = 0; j + k <= 4; ++j) {
            INFO(j, " ", k);
            Coefficient a = G.alpha_of(jk(j, k));
            CHECK(a == h.get(h.alpha, j, k));
            // a - F(s) = (c - F(1)) (1 - e^{-sk})/(1 - e^{-k})
            Coefficient F = h.get(h.forced, j, k);
            Coefficient K = h.get(h.coef, j, k) - F.at_s(1);
            CHECK((a - F) * (1 - exp_constant(Coefficient(-k))) == K * (1 - Coefficient::exp_s(-k)));
            CHECK_FALSE(K.is_zero());
            ++checked;
        }
    CHECK(checked == 10);
    for (auto& [i, a] : h.alpha) CHECK(G.alpha_of(jk(i.first, i.second)) == a);
}

TEST_CASE("deep rejection") {
    Monomial g = em(X() * X());
    Transseries t = X() * (1 + xp(-1) + T(g));
    CHECK(classify(t).purely_deep);
    try {
        build_group(t, Bound::at(xj(6)));
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DeepNoCommonSupport);
        CHECK(e.detail().find("witness " + to_string(g)) != std::string::npos);
    }
    CHECK_THROWS_AS(build_group(X() + 1 + T(g * Monomial::x_pow(1)), Bound::at(xj(6))), Error);
}

TEST_CASE("property: group law") {
    std::mt19937 rng(17);
    const Rational pick[] = {Rational(1, 3), Rational(-1, 3), Rational(1, 2), Rational(-1, 2), Rational(2)};
    std::uniform_int_distribution<int> ix(0, 4);
    auto g = grid();
    Bound bm = Bound::degree(g, 5);
    IterationGroup Gm = build_group(X() * (1 + xp(-1) + T(jk(0, 1))), bm);
    Bound bs = Bound::at(xj(7));
    IterationGroup Gs = build_group(X() + 2 + xp(-1), bs);
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 100; ++i) {
        Rational s = pick[ix(rng)], t = pick[ix(rng)];
        const IterationGroup& G = i % 2 ? Gm : Gs;
        TruncScope ts(G.trunc.scaled(Monomial::x_pow(1)));
        Transseries l = compose(evaluate_group(G, s), evaluate_group(G, t));
        Transseries r = evaluate_group(G, ExponentScalar(s + t));
        check_to_bound(l, r);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 30.0);
}

TEST_CASE("property: random shallow groups") {
    std::mt19937 rng(23);
    Bound b = Bound::at(xj(6));
    for (int i = 0; i < 100; ++i) {
        Rational a = gen::small_rational(rng, 3);
        if (a == 0) a = 1;
        Transseries t = X() + Transseries(a) + xp(-1).scale(gen::small_rational(rng)) + xp(-2).scale(gen::small_rational(rng));
        IterationGroup G = group_shallow(t, b);
        std::size_t above = 0;
        for (std::size_t k = 0; k < G.support.size(); ++k) {
            // polynomial in s of degree at most the number of slots above plus one
            for (auto& ct : G.alpha[k].terms()) {
                CHECK(ct.key.srate == 0);
                CHECK(ct.key.sdeg <= above + 1);
            }
            ++above;
        }
        TruncScope ts(b.scaled(Monomial::x_pow(1)));
        Rational s = gen::small_rational(rng, 2);
        check_to_bound(compose(evaluate_group(G, s), evaluate_group(G, Rational(1 - s))), t);
    }
}

TEST_CASE("property: the generator equation") {
    // x sum alpha'_g(s) g = Phi_x(s, x) * Phi_s(0, x)
    std::mt19937 rng(29);
    auto g = grid();
    Bound b = Bound::degree(g, 5);
    for (int i = 0; i < 100; ++i) {
        Rational a = gen::small_rational(rng, 2), c = gen::small_rational(rng, 2);
        if (a == 0) a = 1;
        Transseries U = xp(-1).scale(a) + xp(-2).scale(gen::small_rational(rng));
        if (c != 0) U += T(jk(0, 1), c);
        IterationGroup G = build_group(X() * (1 + U), b);
        Monomial x = Monomial::x_pow(1);
        std::vector<Term> lhs, gen0;
        for (std::size_t k = 0; k < G.support.size(); ++k) {
            lhs.push_back({G.support[k] * x, G.alpha[k].d_ds()});
            gen0.push_back({G.support[k] * x, G.alpha[k].d_ds().at_s(0)});
        }
        Bound bx = G.trunc.scaled(x);
        TruncScope ts(bx);
        Transseries Phi = group_series(G);
        Transseries rhs = derive(Phi) * Transseries::from_terms(gen0, bx);
        check_to_bound(Transseries::from_terms(lhs, bx), rhs);
    }
}
