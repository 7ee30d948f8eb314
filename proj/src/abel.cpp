#include "tseries/abel.hpp"

namespace tseries {

namespace {
std::size_t g_max_rounds = 128;

Transseries X() { return Transseries::x(); }
Monomial xm(const Rational& a) { return Monomial::x_pow(a); }

bool is_deep_monomial(const Monomial& g) { return is_small(g) && cmp(logderiv_monomial(g).mag(), Monomial::one()) > 0; }

// a truncation for V fine enough that V^[-1] o (V + shift) meets `out`
Bound abel_trunc_for(const Bound& out, const Coefficient& shift) {
    Transseries S = X() + Transseries(shift);
    Bound r;
    if (out.cut()) {
        Monomial c = compose_mag(*out.cut(), X() - Transseries(shift));
        r = Bound::at(cmp(c, *out.cut()) < 0 ? c : *out.cut());
    }
    for (auto& d : out.degrees()) {
        auto rho = degree_factor(*d.g, S);
        if (!rho) fail(ErrorKind::TruncationTooCoarse, "degree bound cannot be carried through the shift");
        r = r | Bound::degree(d.g, d.max * ExponentScalar(1 / *rho));
    }
    return r;
}
}  // namespace

std::size_t max_rounds() { return g_max_rounds; }
void set_max_rounds(std::size_t n) { g_max_rounds = n; }

Transseries verify_abel(const Transseries& V, const Transseries& T, const Coefficient& tau) {
    return compose(V, T) - V - Transseries(tau);
}

bool purely_deep_form(const Transseries& T, Coefficient* tau, Transseries* A) {
    Transseries D = T - X();
    if (D.is_zero() || !D.mag().is_one()) return false;
    const Coefficient& c = D.dominant().c;
    if (!c.is_constant()) return false;
    Transseries rest = D - Transseries(c);
    for (auto& t : rest.terms())
        if (!is_deep_monomial(t.m)) return false;
    if (tau) *tau = c;
    if (A) *A = rest;
    return true;
}

Transseries abel_moderate(const Transseries& T, const Bound& trunc, int* direction) {
    Classification c = classify(T);
    if (c.kind == Kind::Deep) fail(ErrorKind::WrongClass, "series is deep");
    const Monomial x = xm(1);
    IterationGroup G = build_group(T, trunc.scaled(c.e * c.e * xm(-1)));
    std::vector<Term> ts;
    for (std::size_t i = 0; i < G.support.size(); ++i) {
        Coefficient d = G.alpha[i].d_ds().at_s(0);
        if (!d.is_zero()) ts.push_back({G.support[i] * x, d});
    }
    Transseries D = Transseries::from_terms(std::move(ts), G.trunc.scaled(x));
    Transseries R;
    {
        TruncScope s(trunc.scaled(xm(-2)));
        R = pow_real(D, -1);
    }
    int dir = sign_of(c.a);
    if (direction) *direction = dir;
    TruncScope s(trunc);
    Transseries V = integrate(R);
    return dir > 0 ? V : -V;
}

Transseries abel_purely_deep(const Transseries& T, const Bound& trunc) {
    Transseries A;
    if (!purely_deep_form(T, nullptr, &A))
        fail(ErrorKind::NotPurelyDeepNormalForm, "expected x + tau + A with A purely deep, got " + to_string(T));
    TruncScope s(trunc);
    Transseries V = X().with_bound(trunc), B = A.with_bound(trunc);
    for (std::size_t r = 0; !B.is_zero(); ++r) {
        if (r >= max_rounds()) fail(ErrorKind::BudgetExhausted, "Abel iteration did not settle within the round budget");
        V += B;
        Transseries N = compose(B, T);
        if (!N.is_zero() && cmp(N.mag(), B.mag()) >= 0)
            fail(ErrorKind::NoContraction, "A o T is not smaller than A at " + to_string(B.mag()));
        B = N;
    }
    return V.with_bound(B.bound());
}

std::vector<Transseries> abel_rounds(const Transseries& T, std::size_t k, const Monomial& rel) {
    Transseries A;
    if (!purely_deep_form(T, nullptr, &A))
        fail(ErrorKind::NotPurelyDeepNormalForm, "expected x + tau + A with A purely deep");
    if (A.is_zero()) return {};
    std::vector<Transseries> out;
    Transseries B = A.with_bound(Bound::at(A.mag() * rel));
    for (std::size_t j = 0; j < k; ++j) {
        out.push_back(B);
        if (j + 1 == k) break;
        TruncScope s(Bound::at(compose_mag(B.mag(), T) * rel));
        B = compose(B, T);
    }
    return out;
}

Reduction reduce_deep(const Transseries& T, const Bound& trunc) {
    Coefficient tau;
    if (purely_deep_form(T, &tau)) return {X(), T};
    Classification c = classify(T);
    if (c.kind != Kind::Deep) fail(ErrorKind::WrongClass, "reduction expects a deep series");
    Transseries U = near_identity_part(T);
    std::vector<Term> mod;
    for (auto& t : U.terms())
        if (compare_to_threshold(t.m, c.e) <= 0) mod.push_back(t);
    Transseries T1 = X() * (1 + Transseries::from_sorted(std::move(mod)));
    int dir = 1;
    Reduction out;
    out.V = abel_moderate(T1, trunc, &dir);
    TruncScope s(trunc);
    Transseries Vi = compose_inverse(out.V);
    out.R = compose(compose(out.V, T), Vi);
    if (!purely_deep_form(out.R, &tau) || tau != Coefficient(dir))
        fail(ErrorKind::ReductionNotPurelyDeep, "reduced series is " + to_string(out.R));
    return out;
}

AbelResult abel_general(const Transseries& T, const Bound& trunc) {
    AbelResult out;
    out.conj = conjugate_to_x(T, trunc, &out.mags);
    out.k = out.mags.size();
    if (purely_deep_form(out.conj, &out.tau)) {
        out.V = abel_purely_deep(out.conj, trunc);
    } else if (classify(out.conj).kind == Kind::Deep) {
        Reduction r = reduce_deep(out.conj, trunc);
        purely_deep_form(r.R, &out.tau);
        Transseries W = abel_purely_deep(r.R, trunc);
        TruncScope s(trunc);
        out.V = compose(W, r.V);
    } else {
        int dir = 1;
        out.V = abel_moderate(out.conj, trunc, &dir);
        out.tau = Coefficient(dir);
    }
    out.direction = sign_of(out.tau);
    return out;
}

Transseries shift_conjugate(const Transseries& V, const Coefficient& s) {
    Transseries B = V - X();
    for (auto& t : B.terms())
        if (!is_deep_monomial(t.m)) fail(ErrorKind::NotPurelyDeepNormalForm, "V - x is not purely deep");
    Transseries Y = Transseries(s).with_bound(current_trunc());
    for (std::size_t r = 0;; ++r) {
        if (r >= max_rounds()) fail(ErrorKind::BudgetExhausted, "shift iteration did not settle within the round budget");
        Transseries N = Transseries(s) + B - compose(B, X() + Y);
        if (N.same_as(Y)) break;
        Y = N;
    }
    return X() + Y;
}

Bound pull_back_down(const Bound& outer, const Monomial& m) {
    if (outer.exact()) return outer;
    if (!outer.degrees().empty())
        fail(ErrorKind::TruncationTooCoarse, "degree bounds cannot be pulled back through conjugation");
    return Bound::at(compose_mag(*outer.cut() / m, exp_series(X())));
}

Monomial conj_down_mag(const Transseries& T) {
    TruncScope s(Bound::at(Monomial::one()));
    Transseries large = compose(T, Transseries::term(1, Monomial::log_atom(1)));
    return intern_exponential(-large.exact_part()).first;
}

Transseries frac_iterate(const Transseries& T, const ExponentScalar& s0, const Bound& trunc,
                         std::vector<Transseries>* levels) {
    const Coefficient s(s0);
    std::vector<Monomial> up;
    Transseries coarse;
    {
        TruncScope ts(Bound::at(xm(-1)));
        Transseries C = conjugate_to_x(T, Bound::at(xm(-1)), &up);
        coarse = X() + (C - X()).scale(s);
    }
    std::size_t k = up.size();
    // magnitudes of the iterate at each level, then the truncations they force
    std::vector<Monomial> down(k + 1, xm(1));
    for (std::size_t i = k; i-- > 0;) {
        down[i] = conj_down_mag(coarse);
        TruncScope ts(Bound::at(down[i] * xm(-1)));
        coarse = conj_down(coarse);
    }
    std::vector<Bound> tr(k + 1);
    tr[0] = trunc;
    for (std::size_t i = 0; i < k; ++i) tr[i + 1] = pull_back_down(tr[i], down[i]);

    Transseries It;
    Transseries C = conjugate_to_x(T, tr[k], nullptr);
    Coefficient tau;
    if (purely_deep_form(C, &tau)) {
        AbelResult r = abel_general(T, abel_trunc_for(tr[k], s * tau));
        TruncScope ts(tr[k]);
        It = shift_conjugate(r.V, s * tau);
    } else if (classify(C).kind != Kind::Deep) {
        IterationGroup G = build_group(C, tr[k].scaled(xm(-1)));
        It = evaluate_group(G, s0);
    } else {
        AbelResult r = abel_general(T, tr[k]);
        TruncScope ts(tr[k]);
        Transseries Vi = compose_inverse(r.V);
        It = compose(Vi, r.V + Transseries(s * r.tau));
    }
    if (levels) levels->assign(k + 1, Transseries());
    for (std::size_t i = k;; --i) {
        if (levels) (*levels)[i] = It;
        if (i == 0) break;
        TruncScope ts(tr[i - 1]);
        It = conj_down(It);
    }
    return It;
}

ExponentScalar find_exponent(const Transseries& A, const Transseries& B, const Bound& trunc) {
    {
        TruncScope ts(trunc);
        if (!equal_to_bound(compose(A, B), compose(B, A)))
            fail(ErrorKind::NotCommuting, "the two series do not commute above the bound");
    }
    AbelResult r = abel_general(B, trunc);
    std::vector<Monomial> ma;
    Transseries Ac = conjugate_to_x(A, trunc, &ma);
    if (ma.size() != r.k) fail(ErrorKind::NotCommuting, "the series need different numbers of conjugations");
    TruncScope ts(trunc);
    Transseries W = compose(r.V, Ac) - r.V;
    if (W.is_zero() || !W.mag().is_one() || !W.dominant().c.is_constant())
        fail(ErrorKind::VerificationFailed, "V o A - V is not a constant");
    Coefficient sigma = W.dominant().c;
    if (!(W - Transseries(sigma)).is_zero()) fail(ErrorKind::VerificationFailed, "V o A - V is not a constant");
    return (sigma * invert_coefficient(r.tau)).to_scalar();
}

}  // namespace tseries
