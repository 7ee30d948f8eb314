#include "tseries/calculus.hpp"

#include <atomic>

namespace tseries {

namespace {
std::atomic<std::size_t> g_by_parts{64};

Monomial shift_depth(const Monomial& q, std::size_t k) {
    if (k == 0 || q.lp.empty()) return q;
    Monomial m;
    m.lp.assign(k, ExponentScalar());
    m.lp.insert(m.lp.end(), q.lp.begin(), q.lp.end());
    m.ex = q.ex;
    return m;
}

// derivative of an O(b) term set: n <= b implies n' <= max(b', b/x)
Bound derive_bound(const Bound& b, const Transseries& a) {
    if (b.exact()) return b;
    Bound r;
    if (b.cut()) {
        const Monomial& c = *b.cut();
        Monomial over_x = c * Monomial::x_pow(-1);
        Transseries dl = logderiv_monomial(c);
        Monomial m = over_x;
        if (!dl.is_zero()) m = max_of(c * dl.mag(), over_x);
        r = Bound::at(m);
    }
    for (auto& d : b.degrees()) {
        ExponentScalar shift;
        bool first = true;
        for (auto& t : a.terms()) {
            Transseries dl = logderiv_monomial(t.m);
            for (auto& u : dl.terms()) {
                ExponentScalar g = d.g->degree(u.m);
                if (first || cmp_scalar(g, shift) < 0) shift = g;
                first = false;
            }
        }
        ExponentScalar x1 = d.g->degree(Monomial::x_pow(-1));
        if (first || cmp_scalar(x1, shift) < 0) shift = x1;
        if (cmp_scalar(shift, ExponentScalar()) > 0) shift = ExponentScalar();
        r = r | Bound::degree(d.g, d.max + shift);
    }
    return r;
}
}  // namespace

std::size_t by_parts_limit() { return g_by_parts.load(); }
void set_by_parts_limit(std::size_t n) { g_by_parts.store(n); }

Transseries derive(const Transseries& a) {
    Transseries r = Transseries().with_bound(derive_bound(a.bound(), a));
    std::vector<Term> ts;
    for (auto& t : a.terms()) {
        Transseries dl = logderiv_monomial(t.m);
        for (auto& u : dl.terms()) ts.push_back({u.m * t.m, u.c * t.c});
    }
    return Transseries::from_terms(std::move(ts), r.bound());
}

Transseries logderiv(const Transseries& a) { return derive(a) * invert_unit(a); }

namespace {

// adds the antiderivative of c * q(y), where y = log^[k] x
void int_pure(const Coefficient& c, const Monomial& q, std::size_t k, std::vector<Term>& out, bool& dropped,
              std::size_t level) {
    if (level > by_parts_limit()) fail(ErrorKind::NonIntegrableAtCut, "by-parts recursion does not descend");
    ExponentScalar a = q.exponent(0);
    if (a == ExponentScalar(-1)) {
        Monomial inner;
        inner.lp.assign(q.lp.begin() + 1, q.lp.end());
        int_pure(c, inner, k + 1, out, dropped, level);
        return;
    }
    ExponentScalar a1 = a + ExponentScalar(1);
    Coefficient inv = invert_coefficient(Coefficient(a1));
    Monomial lead = q * Monomial::x_pow(1);
    Monomial shifted = shift_depth(lead, k);
    check_depth(shifted);
    const Bound& T = current_trunc();
    if (!T.exact() && T.negligible(shifted)) {
        dropped = true;
        return;
    }
    out.push_back({shifted, c * inv});
    for (std::size_t d = 1; d < q.lp.size(); ++d) {
        if (q.lp[d].is_zero()) continue;
        Monomial child = q;
        for (std::size_t j = 1; j <= d; ++j) child.lp[j] = child.lp[j] - ExponentScalar(1);
        while (!child.lp.empty() && child.lp.back().is_zero()) child.lp.pop_back();
        int_pure(-c * inv * Coefficient(q.lp[d]), child, k, out, dropped, level + 1);
    }
}

Transseries int_exponential(const Coefficient& c, const Monomial& m) {
    // int m = m G with G = (1 - G') / m^dagger
    Transseries G;
    {
        TruncScope rel(current_trunc().scaled(inverse(m)));
        Transseries dl = logderiv_monomial(m);
        Transseries Q = invert_unit(dl);
        G = Q;
        for (std::size_t it = 0;; ++it) {
            if (it > by_parts_limit()) fail(ErrorKind::NonIntegrableAtCut, "by-parts iteration does not settle");
            Transseries next = Q - Q * derive(G);
            if (next.same_as(G)) break;
            G = next;
        }
    }
    return G.scale(c, m);
}

Bound integrate_bound(const Bound& b) {
    if (b.exact()) return b;
    Bound r;
    Monomial up = Monomial::x_pow(1) * Monomial::log_atom(1);
    if (b.cut()) r = Bound::at(*b.cut() * up);
    for (auto& d : b.degrees()) r = r | Bound::degree(d.g, d.max + d.g->degree(up));
    return r;
}

}  // namespace

Transseries integrate(const Transseries& a) {
    Transseries r = Transseries().with_bound(integrate_bound(a.bound()));
    std::vector<Term> pure;
    bool dropped = false;
    for (auto& t : a.terms()) {
        if (t.m.ex) {
            r += int_exponential(t.c, t.m);
        } else {
            int_pure(t.c, t.m, 0, pure, dropped, 0);
        }
    }
    r += Transseries::from_terms(std::move(pure), dropped ? current_trunc() : Bound{});
    return r;
}

Transseries exp_series(const Transseries& a) {
    Split s = split(a);
    if (!a.bound().exact() && a.bound().cut() && !is_small(*a.bound().cut()))
        fail(ErrorKind::TruncationTooCoarse, "exponent known only up to a non-small bound");
    auto [m, k] = intern_exponential(-s.large);
    check_depth(m);
    Coefficient coef = k * exp_constant(s.constant);
    Transseries e;
    {
        TruncScope rel(current_trunc().scaled(inverse(m)));
        std::vector<Coefficient> inv{Coefficient(1)};
        e = power_series(s.small, [&](unsigned n) {
            while (inv.size() <= n) inv.push_back(inv.back() * Coefficient(Rational(1, inv.size())));
            return inv[n];
        });
    }
    return e.scale(coef, m);
}

Transseries log_series(const Transseries& a) {
    if (a.is_zero()) fail(ErrorKind::ZeroSeries, "log of zero");
    const Term& d = a.dominant();
    if (sign_of(d.c) <= 0) fail(ErrorKind::NegativeBase, "log of a negative series");
    Transseries r(Coefficient(log_coefficient(d.c)));
    if (d.m.ex) r -= Registry::instance().get(d.m.ex);
    for (std::size_t i = 0; i < d.m.lp.size(); ++i) {
        if (d.m.lp[i].is_zero()) continue;
        Monomial atom = Monomial::log_atom(i + 1);
        check_depth(atom);
        r += Transseries::term(Coefficient(d.m.lp[i]), atom);
    }
    Coefficient ci = invert_coefficient(d.c);
    Transseries rest =
        Transseries::from_sorted(std::vector<Term>(a.terms().begin() + 1, a.terms().end()), a.bound());
    Transseries u = rest.scale(ci, inverse(d.m));
    r += power_series(u, [](unsigned n) {
        if (n == 0) return Coefficient(0);
        return Coefficient(Rational(n % 2 ? 1 : -1, n));
    });
    return r;
}

}  // namespace tseries
