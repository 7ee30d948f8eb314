#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "tseries/classify.hpp"

using namespace tseries;

namespace {
Transseries X() { return Transseries::x(); }
Transseries xp(const Rational& a) { return Transseries::term(1, Monomial::x_pow(a)); }
Monomial em(const Transseries& L) { return intern_exponential(L).first; }
Transseries T(const Monomial& m, const Coefficient& c = 1) { return Transseries::term(c, m); }
Monomial x1() { return Monomial::x_pow(-1); }
}  // namespace

TEST_CASE("first ratio") {
    Monomial g = em(X() * X());
    auto [a, e] = first_ratio(X() * (1 + xp(-1) + T(g)));
    CHECK(a == Coefficient(1));
    CHECK(e == x1());
    auto r = first_ratio(X() + 1);
    CHECK(r.second == x1());
    CHECK_THROWS_WITH_AS(first_ratio(X()), doctest::Contains("IdentitySeries"), Error);
    CHECK_THROWS_AS(first_ratio(X().scale(2)), Error);
    CHECK_THROWS_AS(first_ratio(X() * X()), Error);
}

TEST_CASE("classification") {
    Coefficient c1 = Coefficient::param("c1"), c2 = Coefficient::param("c2");
    Classification p = classify(X() + Transseries(c1) + xp(-1).scale(c2));
    CHECK(p.kind == Kind::Shallow);
    CHECK(p.witnesses.empty());

    Monomial ex = em(X());
    Classification m = classify(X() * (1 + xp(-1) + T(ex) + T(ex * x1(), 3)));
    CHECK(m.kind == Kind::Moderate);
    REQUIRE(m.witnesses.size() == 2);
    CHECK(m.witnesses[0].g == ex);
    CHECK(m.witnesses[0].b == Coefficient(-1));

    Monomial g = em(X() * X());
    Classification d = classify(X() * (1 + xp(-1) + T(g)));
    CHECK(d.kind == Kind::Deep);
    CHECK(d.purely_deep);
    REQUIRE(d.witnesses.size() == 1);
    CHECK(d.witnesses[0].g == g);

    Classification d2 = classify(X() * (1 + xp(-1) + T(ex) + T(g)));
    CHECK(d2.kind == Kind::Deep);
    CHECK_FALSE(d2.purely_deep);
}

TEST_CASE("classification refuses a bound above the first ratio") {
    Transseries t0 = (X() + T(x1())).with_bound(Bound::at(Monomial::one()));
    CHECK_THROWS_WITH_AS(classify(t0), doctest::Contains("TruncationTooCoarse"), Error);
}

TEST_CASE("exponentiality") {
    CHECK(exponentiality(X() * X() + Transseries(Coefficient::param("c"))) == 0);
    CHECK(exponentiality(exp_series(X())) == 1);
    CHECK(exponentiality(exp_series(exp_series(X()))) == 2);
    CHECK(exponentiality(T(Monomial::x_pow(1) * Monomial::log_atom(1))) == 0);
    CHECK(exponentiality(T(Monomial::log_atom(1))) == -1);
    CHECK(exponentiality(X().scale(3) + 1) == 0);
}

TEST_CASE("classification after conjugation") {
    auto xl = classify_extended(T(Monomial::x_pow(1) * Monomial::log_atom(1)));
    CHECK(xl.k == 1);
    CHECK(xl.c.kind == Kind::Shallow);

    Monomial mu = em(X().scale(2));
    {
        TruncScope ts(Bound::at(power(mu, 3) * x1()));
        auto u = classify_extended(X().scale(2) - xp(-1).scale(2));
        CHECK(u.k == 1);
        CHECK(u.c.kind == Kind::Moderate);
        CHECK(u.c.witnesses[0].g == mu * x1());
        CHECK(u.c.witnesses[0].b == Coefficient(-2));
    }
    {
        Monomial ee = em(exp_series(X()) + X());
        TruncScope ts(Bound::at(ee * ee * x1()));
        auto v = classify_extended(X().scale(2) - T(em(X()), 2));
        CHECK(v.k == 1);
        CHECK(v.c.kind == Kind::Deep);
        CHECK(v.c.witnesses[0].g == ee * x1());
    }
    auto same = classify_extended(X() + 1);
    CHECK(same.k == 0);
    CHECK(same.c.kind == Kind::Shallow);
}

TEST_CASE("classification is stable under conjugation") {
    // x + 1 + x^-1 and its conjugate log(T(e^x)) are both shallow
    TruncScope ts(Bound::at(em(X().scale(3))));
    Transseries t0 = X() + 1 + xp(-1);
    Transseries up = conj_up(t0);
    CHECK(classify(t0).kind == Kind::Shallow);
    CHECK(classify(up).kind == classify(t0).kind);
    Transseries m0 = X() * (1 + xp(-1) + T(em(X())));
    CHECK(classify(m0).kind == Kind::Moderate);
}

TEST_CASE("property: two-term series are shallow") {
    std::mt19937 g(3);
    std::uniform_int_distribution<int> pick(0, 3), pw(1, 4);
    for (int i = 0; i < 120; ++i) {
        Rational q = gen::small_rational(g, 3);
        if (q == 0) q = 1;
        Monomial e;
        switch (pick(g)) {
            case 0: e = Monomial::x_pow(Rational(-pw(g), pw(g))); break;
            case 1: e = em(X().scale(pw(g))) * Monomial::x_pow(pw(g) - 2); break;
            case 2: e = em(X() * X()) * Monomial::x_pow(pw(g)); break;
            default: e = Monomial::log_atom(1, -pw(g)); break;
        }
        REQUIRE(is_small(e));
        Classification c = classify(X() * (1 + T(e, q)));
        CHECK(c.kind == Kind::Shallow);
        CHECK(c.e == e);
    }
}

TEST_CASE("property: moderate estimate g(T) ~ e^{ab} g") {
    std::mt19937 g(5);
    std::uniform_int_distribution<int> kk(1, 3), jj(-1, 2);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        Rational a = gen::small_rational(g, 2);
        if (a == 0) a = 1;
        int k = kk(g), j = jj(g);
        Monomial w = em(X().scale(k)) * Monomial::x_pow(-j);
        Rational ce = gen::small_rational(g, 2);
        if (ce == 0) ce = -1;
        Transseries t0 = X() * (1 + xp(-1).scale(a) + T(em(X()), ce));
        Classification c = classify(t0);
        REQUIRE(c.kind == Kind::Moderate);
        CHECK(compare_to_threshold(w, c.e) == 0);
        Coefficient b = moderate_constant(w, c.e);
        CHECK(b == Coefficient(-k));
        // numeric: w(T(x)) / w(x) -> e^{ab}
        double x0 = 4000;
        double tx = eval_double(t0, Rational(4000), {}).value.mid();
        double ratio = std::exp(-k * (tx - x0)) * std::pow(tx / x0, -j);
        CHECK(std::abs(ratio / std::exp(a.get_d() * b.as_rational().get_d()) - 1) < 0.01);
        ++checked;
    }
    CHECK(checked == 100);
}
