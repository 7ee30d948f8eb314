#include "tseries/classify.hpp"

namespace tseries {

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Shallow: return "shallow";
        case Kind::Moderate: return "moderate";
        case Kind::Deep: return "deep";
    }
    return "?";
}

namespace {
bool is_x(const Term& t) { return t.m == Monomial::x_pow(1) && t.c == Coefficient(1); }
}  // namespace

Transseries near_identity_part(const Transseries& T) {
    if (T.is_zero() || !is_x(T.dominant())) fail(ErrorKind::NotNearIdentity, "series is not ~ x");
    return (T - Transseries::x()).scale(1, Monomial::x_pow(-1));
}

std::pair<Coefficient, Monomial> first_ratio(const Transseries& T) {
    Transseries U = near_identity_part(T);
    if (U.is_zero()) {
        if (U.exact()) fail(ErrorKind::IdentitySeries, "series is x");
        fail(ErrorKind::TruncationTooCoarse, "nothing of T - x is known above the bound");
    }
    return {U.dominant().c, U.mag()};
}

int compare_to_threshold(const Monomial& g, const Monomial& e) {
    Transseries gd = logderiv_monomial(g);
    return cmp(gd.mag(), inverse(Monomial::x_pow(1) * e));
}

Coefficient moderate_constant(const Monomial& g, const Monomial& e) {
    Transseries r = logderiv_monomial(g).scale(1, Monomial::x_pow(1) * e);
    const Term& d = r.dominant();
    if (!d.m.is_one() || !d.c.is_constant())
        fail(ErrorKind::SignUndecidable, "moderate constant of " + to_string(g) + " is not numeric");
    return d.c;
}

Classification classify(const Transseries& T) {
    auto [a, e] = first_ratio(T);
    Transseries U = near_identity_part(T);
    if (U.bound().cut() && cmp(*U.bound().cut(), e) >= 0)
        fail(ErrorKind::TruncationTooCoarse, "bound hides the first ratio");
    Classification c;
    c.a = a;
    c.e = e;
    bool deep = false, moderate = false, pure = true;
    std::optional<Monomial> deep_max;
    for (auto& t : U.terms()) {
        int k = compare_to_threshold(t.m, e);
        if (k > 0) {
            deep = true;
            if (!deep_max) deep_max = t.m;
        } else if (t.m != e) {
            pure = false;
        }
        if (k == 0) {
            moderate = true;
            c.witnesses.push_back({t.m, moderate_constant(t.m, e)});
        }
    }
    if (deep) {
        c.kind = Kind::Deep;
        c.purely_deep = pure;
        c.witnesses = {{*deep_max, Coefficient()}};
    } else if (moderate) {
        c.kind = Kind::Moderate;
    }
    return c;
}

namespace {
// 0 for x, p > 0 for exp_p(x), p < 0 for log_{-p}(x); nullopt otherwise
std::optional<int> tower_level(const Monomial& m) {
    std::size_t d;
    if (m.is_log_atom(&d)) return -static_cast<int>(d);
    if (m.lp.empty() && m.ex) {
        const Transseries& L = Registry::instance().get(m.ex);
        if (L.size() != 1 || L.terms()[0].c != Coefficient(-1)) return std::nullopt;
        auto inner = tower_level(L.terms()[0].m);
        if (!inner || *inner < 0) return std::nullopt;
        return *inner + 1;
    }
    return std::nullopt;
}
}  // namespace

int exponentiality(const Transseries& T, std::size_t budget) {
    if (!is_large_positive(T)) fail(ErrorKind::NotLargePositive, "exponentiality needs a large positive series");
    TruncScope ts(Bound::at(Monomial::x_pow(-1)));
    Transseries A = T;
    for (std::size_t k = 0; k <= budget; ++k) {
        const Term& d = A.dominant();
        if (d.c == Coefficient(1))
            if (auto p = tower_level(d.m)) return *p;
        if (k == budget) break;
        A = conj_up(A).exact_part();
    }
    fail(ErrorKind::Unstabilized, "exponentiality did not stabilize within the budget");
}

Bound pull_back_up(const Bound& outer, const Monomial& magA) {
    if (outer.exact()) return outer;
    if (!outer.degrees().empty())
        fail(ErrorKind::TruncationTooCoarse, "degree bounds cannot be pulled back through conjugation");
    Monomial c = compose_mag(*outer.cut(), Transseries::term(1, Monomial::log_atom(1)));
    return Bound::at(c * magA);
}

Transseries conjugate_to_x(const Transseries& T, const Bound& trunc, std::vector<Monomial>* mags_out, std::size_t budget) {
    if (!is_large_positive(T)) fail(ErrorKind::NotLargePositive, "conjugation needs a large positive series");
    std::vector<Monomial> mags{T.mag()};
    {
        TruncScope ts(Bound::at(Monomial::x_pow(-1)));
        Transseries A = T;
        while (!is_x(A.dominant())) {
            if (mags.size() > budget) fail(ErrorKind::Unstabilized, "no conjugate ~ x within the budget");
            A = conj_up(A).exact_part();
            mags.push_back(A.mag());
        }
    }
    std::size_t k = mags.size() - 1;
    std::vector<Bound> tr(k + 1);
    tr[k] = trunc;
    for (std::size_t i = k; i-- > 0;) {
        tr[i] = pull_back_up(tr[i + 1], mags[i]);
        // conj_up needs a relative cut below 1
        Monomial floor = Monomial::x_pow(-1);
        if (tr[i].cut() && cmp(*tr[i].cut(), floor) > 0) tr[i] = Bound::at(floor);
    }
    Transseries A = T;
    for (std::size_t i = 1; i <= k; ++i) {
        TruncScope ts(tr[i]);
        A = conj_up(A);
    }
    mags.pop_back();
    if (mags_out) *mags_out = mags;
    return A;
}

ExtendedClass classify_extended(const Transseries& T, std::size_t budget) {
    if (!is_large_positive(T)) fail(ErrorKind::NotLargePositive, "classification needs a large positive series");
    std::vector<Monomial> mags;
    ExtendedClass out;
    out.conj = conjugate_to_x(T, current_trunc(), &mags, budget);
    out.k = mags.size();
    out.c = classify(out.conj);
    return out;
}

}  // namespace tseries
