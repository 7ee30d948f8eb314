#include "tseries/itergroup.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace tseries {

namespace {

using MonoSet = std::unordered_set<Monomial, MonomialHash>;
template <class V>
using MonoMap = std::unordered_map<Monomial, V, MonomialHash>;

// 1 + x g^dagger, so that (x g1)' g2 = g1 g2 (1 + x g1^dagger)
class Factors {
public:
    const Transseries& of(const Monomial& g) {
        auto it = h_.find(g);
        if (it != h_.end()) return it->second;
        TruncScope ts{Bound{}};
        Transseries h = Transseries(1) + logderiv_monomial(g).scale(1, Monomial::x_pow(1));
        return h_.emplace(g, h).first->second;
    }
    Transseries product(const Monomial& g1, const Monomial& g2) { return of(g1).scale(1, g1 * g2); }

private:
    MonoMap<Transseries> h_;
};

void sort_desc(std::vector<Monomial>& v) {
    std::sort(v.begin(), v.end(), [](const Monomial& a, const Monomial& b) { return cmp(a, b) > 0; });
}

}  // namespace

Coefficient IterationGroup::alpha_of(const Monomial& g) const {
    for (std::size_t i = 0; i < support.size(); ++i)
        if (support[i] == g) return alpha[i];
    return {};
}

std::vector<Monomial> closure_support(const std::vector<Monomial>& suppU, const Bound& trunc) {
    Factors F;
    MonoSet seen;
    std::vector<Monomial> B;
    std::deque<Monomial> work;
    auto add = [&](const Monomial& m) {
        if (trunc.negligible(m) || !seen.insert(m).second) return;
        if (seen.size() > term_budget()) fail(ErrorKind::BudgetExhausted, "support closure exceeds the term budget");
        work.push_back(m);
    };
    for (auto& g : suppU) add(g);
    while (!work.empty()) {
        Monomial g = work.front();
        work.pop_front();
        B.push_back(g);
        for (std::size_t i = 0; i < B.size(); ++i) {
            Monomial h = B[i];
            Transseries gh = F.product(g, h);
            for (auto& t : gh.terms()) add(t.m);
            if (h == g) continue;
            Transseries hg = F.product(h, g);
            for (auto& t : hg.terms()) add(t.m);
        }
    }
    sort_desc(B);
    return B;
}

std::vector<Pair> pairs_for(const Monomial& g, const std::vector<Monomial>& B) {
    Factors F;
    std::vector<Pair> out;
    for (auto& g1 : B)
        for (auto& g2 : B) {
            Coefficient w = F.product(g1, g2).coeff_of(g);
            if (!w.is_zero()) out.push_back({g1, g2, w});
        }
    return out;
}

namespace {

IterationGroup solve(const Transseries& T, const Bound& trunc, const Classification& cls) {
    Transseries U = near_identity_part(T);
    IterationGroup G;
    G.a = cls.a;
    G.e = cls.e;
    G.cls = cls;
    G.trunc = trunc | U.bound();
    MonoMap<Coefficient> cg;
    std::vector<Monomial> supp;
    for (auto& t : U.terms()) {
        if (G.trunc.negligible(t.m)) continue;
        cg[t.m] = t.c;
        supp.push_back(t.m);
    }
    G.support = closure_support(supp, G.trunc);

    Factors F;
    MonoSet inB(G.support.begin(), G.support.end());
    MonoMap<Coefficient> alpha, d0, acc;
    std::vector<Monomial> done;
    const Coefficient s = Coefficient::s_var();
    for (auto& g : G.support) {
        Coefficient f = acc[g], c = cg[g], al;
        int k = compare_to_threshold(g, G.e);
        if (k > 0) fail(ErrorKind::DeepNoCommonSupport, "closure reaches the deep monomial " + to_string(g));
        if (k == 0) {
            Coefficient ab = G.a * moderate_constant(g, G.e);
            if (!ab.is_rational()) fail(ErrorKind::Unsupported, "moderate rate a*b is not rational");
            Rational q = ab.as_rational();
            if (q == 0) fail(ErrorKind::DegenerateDenominator, "a*b vanishes");
            Coefficient Eq = exp_constant(Coefficient(q));
            Coefficient damped = Coefficient::exp_s(-q) * f;
            Coefficient K = c - Eq * damped.integrate_s01();
            al = (Coefficient::exp_s(q) - 1) * invert_coefficient(Eq - 1) * K + Coefficient::exp_s(q) * damped.integrate_s();
        } else {
            al = s * (c - f.integrate_s01()) + f.integrate_s();
        }
        alpha[g] = al;
        d0[g] = al.d_ds().at_s(0);
        done.push_back(g);
        auto feed = [&](const Monomial& g1, const Monomial& g2) {
            Transseries W = F.product(g1, g2);
            for (auto& t : W.terms()) {
                if (!inB.count(t.m)) continue;
                if (t.m == g1 && g2 == G.e) continue;  // moderate self-term, solved in closed form
                if (cmp(t.m, g) >= 0) throw std::logic_error("iteration recursion is not well founded at " + to_string(t.m));
                acc[t.m] += t.c * alpha[g1] * d0[g2];
            }
        };
        for (auto& h : done) {
            feed(g, h);
            if (h != g) feed(h, g);
        }
    }
    for (auto& g : G.support) G.alpha.push_back(alpha[g]);
    return G;
}

bool is_identity_map(const Transseries& T) {
    return T.exact() && T.size() == 1 && T.terms()[0].m == Monomial::x_pow(1) && T.terms()[0].c == Coefficient(1);
}

IterationGroup identity_group(const Bound& trunc) {
    IterationGroup G;
    G.identity = true;
    G.trunc = trunc;
    return G;
}

}  // namespace

IterationGroup group_shallow(const Transseries& T, const Bound& trunc) {
    if (is_identity_map(T)) return identity_group(trunc);
    Classification c = classify(T);
    if (c.kind != Kind::Shallow) fail(ErrorKind::WrongClass, std::string("series is ") + kind_name(c.kind));
    return solve(T, trunc, c);
}

IterationGroup group_moderate(const Transseries& T, const Bound& trunc) {
    if (is_identity_map(T)) return identity_group(trunc);
    Classification c = classify(T);
    if (c.kind == Kind::Deep) fail(ErrorKind::WrongClass, "series is deep");
    return solve(T, trunc, c);
}

IterationGroup build_group(const Transseries& T, const Bound& trunc) {
    if (is_identity_map(T)) return identity_group(trunc);
    Classification c = classify(T);
    if (c.kind == Kind::Deep) {
        const Monomial& m = c.witnesses.front().g;
        Factors F;
        Monomial obstruction = Monomial::x_pow(1) * F.product(m, c.e).mag();
        fail(ErrorKind::DeepNoCommonSupport,
             "witness " + to_string(m) + ", obstruction " + to_string(obstruction));
    }
    return solve(T, trunc, c);
}

namespace {
Transseries assemble(const IterationGroup& G, const std::function<Coefficient(const Coefficient&)>& at) {
    Monomial x = Monomial::x_pow(1);
    std::vector<Term> ts{{x, 1}};
    for (std::size_t i = 0; i < G.support.size(); ++i) {
        Coefficient c = at(G.alpha[i]);
        if (!c.is_zero()) ts.push_back({G.support[i] * x, c});
    }
    return Transseries::from_terms(std::move(ts), G.trunc.scaled(x));
}
}  // namespace

Transseries evaluate_group(const IterationGroup& G, const ExponentScalar& s0) {
    return assemble(G, [&](const Coefficient& a) { return a.at_s(s0); });
}

Transseries group_series(const IterationGroup& G) {
    return assemble(G, [](const Coefficient& a) { return a; });
}

}  // namespace tseries
