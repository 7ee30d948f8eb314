#include "tseries/compose.hpp"

#include <unordered_map>

namespace tseries {

namespace {

class Composer {
public:
    explicit Composer(const Transseries& S) : S_(S) {}

    Monomial mag_log(std::size_t d) {
        if (log_mag_.empty()) log_mag_.push_back(S_.mag());
        if (d < log_mag_.size()) return log_mag_[d];
        TruncScope ts(Bound::at(Monomial::one()));
        Transseries L = S_;
        for (std::size_t k = 1; k <= d; ++k) {
            L = log_series(L);
            if (k >= log_mag_.size()) log_mag_.push_back(L.mag());
        }
        return log_mag_[d];
    }

    // log^[d] S with the given absolute truncation
    Transseries log_iter(std::size_t d, const Bound& abs) {
        if (d == 0) return S_;
        Transseries prev = log_iter(d - 1, abs.scaled(mag_log(d - 1)));
        TruncScope ts(abs);
        return log_series(prev);
    }

    Monomial ex_mag(GenId id) {
        auto it = ex_mag_.find(id);
        if (it != ex_mag_.end()) return it->second;
        Transseries LS = run(Registry::instance().get(id), Bound::at(Monomial::one()));
        Monomial m = intern_exponential(LS.exact_part()).first;
        ex_mag_.emplace(id, m);
        return m;
    }

    Monomial mag_of(const Monomial& m) {
        Monomial r;
        for (std::size_t d = 0; d < m.lp.size(); ++d)
            if (!m.lp[d].is_zero()) r = r * power(mag_log(d), m.lp[d]);
        if (m.ex) r = r * ex_mag(m.ex);
        return r;
    }

    // prod_d (log^[d] S)^{a_d} with the current truncation
    Transseries log_power(const Monomial& m) {
        const Bound tg = current_trunc();
        Monomial Mt = mag_of(m);
        Bound rel = tg.scaled(inverse(Mt));
        Transseries P = 1;
        for (std::size_t d = 0; d < m.lp.size(); ++d) {
            if (m.lp[d].is_zero()) continue;
            Monomial md = mag_log(d);
            Monomial mf = power(md, m.lp[d]);
            Transseries Ld = log_iter(d, rel.scaled(md));
            Transseries F;
            {
                TruncScope ts(rel.scaled(mf));
                F = pow_real(Ld, m.lp[d]);
            }
            TruncScope ts(rel);
            P = P * F.scale(1, inverse(mf));
        }
        return P.scale(1, Mt);
    }

    Transseries run(const Transseries& T, const Bound& trunc) {
        TruncScope ts(trunc);
        std::vector<std::pair<GenId, std::vector<const Term*>>> groups;
        std::unordered_map<GenId, std::size_t> gi;
        for (auto& t : T.terms()) {
            auto it = gi.find(t.m.ex);
            if (it == gi.end()) {
                gi.emplace(t.m.ex, groups.size());
                groups.push_back({t.m.ex, {&t}});
            } else {
                groups[it->second].second.push_back(&t);
            }
        }
        Transseries result;
        for (auto& [ex, terms] : groups) {
            Monomial mE = ex ? ex_mag(ex) : Monomial::one();
            auto sum_group = [&](const Bound& tg) {
                TruncScope s(tg);
                Transseries A;
                std::unordered_map<Monomial, Transseries, MonomialHash> cache;
                for (const Term* t : terms) {
                    Monomial lp = t->m;
                    lp.ex = 0;
                    auto it = cache.find(lp);
                    if (it == cache.end()) it = cache.emplace(lp, log_power(lp)).first;
                    A += it->second.scale(t->c);
                }
                return A;
            };
            Transseries A = sum_group(trunc.scaled(inverse(mE)));
            if (A.is_zero()) {
                if (!A.exact()) result += Transseries().with_bound(trunc);
                continue;
            }
            if (!ex) {
                result += A;
                continue;
            }
            if (!trunc.exact() && trunc.negligible(mE * A.mag())) {
                result += Transseries().with_bound(trunc);
                continue;
            }
            Bound relE = relative_to(trunc, A);
            Transseries LS = run(Registry::instance().get(ex), relE.scaled(inverse(mE)));
            Transseries E;
            {
                TruncScope s(relE);
                E = exp_series(-LS);
            }
            bool lower = false;
            for (auto& d : trunc.degrees())
                if (cmp_scalar(min_degree(*d.g, E), d.g->degree(E.mag())) < 0) lower = true;
            if (lower) A = sum_group(relative_to(trunc, E));
            result += A * E;
        }
        return result;
    }

private:
    Transseries S_;
    std::vector<Monomial> log_mag_;
    std::unordered_map<GenId, Monomial> ex_mag_;
};

bool is_identity(const Transseries& S) {
    return S.exact() && S.size() == 1 && S.terms()[0].m == Monomial::x_pow(1) && S.terms()[0].c == Coefficient(1);
}

}  // namespace

// A degree clause survives T o S, for S = x + delta, scaled by the returned
// factor: delta/x has no negative-degree terms and, for each weighted generator
// x^p, (x + delta)^p - x^p only adds small factors of non-negative degree and
// exponentials that keep a positive share rho of the generator's weight.
// Monomials hidden in the bound are assumed to be products of the weighted
// generators.
std::optional<Rational> degree_factor(const Grading& g, const Transseries& S) {
    Monomial x = Monomial::x_pow(1);
    Transseries delta = S - Transseries::x();
    if (!delta.is_zero() && cmp(delta.mag(), x) >= 0) return std::nullopt;
    for (auto& w : g.depth_w)
        if (w < 0) return std::nullopt;
    for (auto& t : delta.terms())
        if (sign_of(g.degree(t.m / x)) < 0) return std::nullopt;
    Rational rho = 1;
    for (auto& [n, w] : g.gen_w) {
        if (w == 0) continue;
        if (w < 0 || n.ex || n.lp.size() != 1) return std::nullopt;
        Transseries P;
        {
            TruncScope ts(current_trunc().exact() ? Bound::at(Monomial::x_pow(-2)) : current_trunc());
            P = pow_real(S, n.lp[0]) - Transseries::term(1, n);
        }
        ExponentScalar gain;
        for (auto& t : P.terms()) {
            if (is_large(t.m)) {
                if (!t.c.is_constant()) return std::nullopt;
                gain += g.degree(intern_exponential(Transseries::term(t.c, t.m)).first);
            } else if (!t.m.is_one() && sign_of(g.degree(t.m)) < 0) {
                return std::nullopt;
            }
        }
        if (!gain.is_rational()) return std::nullopt;
        Rational r = (w + gain.as_rational()) / w;
        if (r <= 0) return std::nullopt;
        if (r < rho) rho = r;
    }
    return rho;
}

namespace {
ExponentScalar scaled_max(const DegreeClause& d, const Transseries& S) {
    auto rho = degree_factor(*d.g, S);
    if (!rho || (*rho != 1 && sign_of(d.max) < 0))
        fail(ErrorKind::TruncationTooCoarse, "degree bound cannot be carried through this composition");
    return d.max * ExponentScalar(*rho);
}

}  // namespace

Monomial compose_mag(const Monomial& m, const Transseries& S) {
    Composer c(S);
    return c.mag_of(m);
}

Transseries compose(const Transseries& T, const Transseries& S) {
    if (!is_large_positive(S)) fail(ErrorKind::NotLargePositive, "right argument of composition is not large positive");
    if (is_identity(S)) return T.with_bound(current_trunc());
    Composer c(S);
    Transseries R = c.run(T.exact_part(), current_trunc());
    Bound extra;
    const Bound& bT = T.bound();
    if (!bT.exact()) {
        if (bT.cut()) extra = extra | Bound::at(c.mag_of(*bT.cut()));
        for (auto& d : bT.degrees()) extra = extra | Bound::degree(d.g, scaled_max(d, S));
    }
    const Bound& bS = S.bound();
    if (!bS.exact() && !T.is_zero()) {
        Transseries D = derive(T.exact_part());
        if (!D.is_zero()) {
            Monomial mD = c.mag_of(D.mag());
            if (bS.cut()) extra = extra | Bound::at(*bS.cut() * mD);
            for (auto& d : bS.degrees()) {
                auto rho = degree_factor(*d.g, S);
                if (!rho) fail(ErrorKind::TruncationTooCoarse, "degree bound cannot be carried through this composition");
                ExponentScalar lo;
                for (auto& t : D.terms()) {
                    ExponentScalar g = d.g->degree(t.m);
                    if (cmp_scalar(g, lo) < 0) lo = g;
                }
                extra = extra | Bound::degree(d.g, d.max + lo);
            }
        }
    }
    return extra.exact() ? R : R.with_bound(extra);
}

Transseries shift(const Transseries& T, const Coefficient& k) { return compose(T, Transseries::x() + Transseries(k)); }

Transseries conj_up(const Transseries& T) {
    Transseries E = exp_series(Transseries::x());
    Monomial mC = compose_mag(T.mag(), E);
    Transseries C;
    {
        TruncScope ts(current_trunc().scaled(mC));
        C = compose(T, E);
    }
    return log_series(C);
}

Transseries conj_down(const Transseries& T) {
    Transseries Lg = Transseries::term(1, Monomial::log_atom(1));
    Transseries large;
    {
        TruncScope ts(Bound::at(Monomial::one()));
        large = compose(T, Lg);
    }
    Monomial mR = intern_exponential(-large.exact_part()).first;
    Transseries C;
    {
        TruncScope ts(current_trunc().scaled(inverse(mR)));
        C = compose(T, Lg);
    }
    return exp_series(C);
}

Transseries conj_power(const Transseries& T, const Rational& k) {
    if (k <= 0) fail(ErrorKind::SemanticError, "conjugation power must be positive");
    Transseries Xk = Transseries::term(1, Monomial::x_pow(k));
    Rational ik = 1 / k;
    Monomial mC = compose_mag(T.mag(), Xk);
    Monomial mR = power(mC, ik);
    Transseries C;
    {
        TruncScope ts(current_trunc().scaled(inverse(mR)).scaled(mC));
        C = compose(T, Xk);
    }
    return pow_real(C, ik);
}

Transseries compose_inverse(const Transseries& T) {
    if (!is_large_positive(T)) fail(ErrorKind::NotLargePositive, "inverse needs a large positive series");
    const Term& d = T.dominant();
    if (d.m.ex || d.m.lp.size() != 1 || !d.c.is_constant())
        fail(ErrorKind::Unsupported, "inverse needs a dominant term c*x^a");
    ExponentScalar ia;
    {
        Coefficient a(d.m.lp[0]);
        ia = invert_coefficient(a).to_scalar();
    }
    const Bound trunc = current_trunc();
    Transseries S = Transseries::term(pow_coefficient(invert_coefficient(d.c), ia), Monomial::x_pow(ia));
    Transseries D = derive(T.exact_part());
    std::optional<Monomial> prev;
    for (int round = 0; round < 64; ++round) {
        Monomial mDS = compose_mag(D.mag(), S);
        Transseries R;
        {
            TruncScope ts(trunc.scaled(mDS));
            R = compose(T, S) - Transseries::x();
        }
        if (R.is_zero()) return trunc.exact() ? S : S.with_bound(trunc);
        if (prev && cmp(R.mag(), *prev) >= 0) fail(ErrorKind::NoProgress, "inverse residual does not decrease");
        prev = R.mag();
        Transseries DS, iDS;
        {
            TruncScope ts(trunc.scaled(mDS));
            DS = compose(D, S);
        }
        {
            TruncScope ts(trunc.scaled(inverse(mDS)));
            iDS = invert_unit(DS);
        }
        TruncScope ts(trunc);
        S = S - R * iDS;
    }
    fail(ErrorKind::NoProgress, "inverse did not settle in 64 rounds");
}

Interval eval_monomial(const Monomial& m, const Interval& x, const Bindings& b) {
    mpfr_prec_t prec = x.prec();
    Interval v = Interval::of(1, prec);
    Interval L = x;
    for (std::size_t d = 0; d < m.lp.size(); ++d) {
        if (d > 0) L = L.log();
        if (m.lp[d].is_zero()) continue;
        if (m.lp[d].is_rational() && m.lp[d].as_rational().get_den() == 1)
            v = v * L.powi(m.lp[d].as_rational().get_num().get_si());
        else
            v = v * L.pow(m.lp[d].enclose(prec));
    }
    if (m.ex) {
        const Transseries& G = Registry::instance().get(m.ex);
        Interval s = Interval::of(0, prec);
        for (auto& t : G.terms()) s = s + eval_numeric(t.c, b, prec) * eval_monomial(t.m, x, b);
        v = v * (-s).exp();
    }
    return v;
}

NumericValue eval_double(const Transseries& T, const Rational& x0, const Bindings& b, mpfr_prec_t prec) {
    Interval x = Interval::of(x0, prec);
    NumericValue out{Interval::of(0, prec), 0};
    for (auto& t : T.terms()) out.value = out.value + eval_numeric(t.c, b, prec) * eval_monomial(t.m, x, b);
    if (T.bound().cut()) out.bound_estimate = std::abs(eval_monomial(*T.bound().cut(), x, b).mid());
    return out;
}

}  // namespace tseries
