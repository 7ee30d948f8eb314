#include "tseries/monomial.hpp"

#include <atomic>
#include <deque>
#include <mutex>
#include <unordered_map>

#include "tseries/calculus.hpp"
#include "tseries/series.hpp"

namespace tseries {

namespace {
std::atomic<std::size_t> g_depth_cap{3};

void trim(std::vector<ExponentScalar>& lp) {
    while (!lp.empty() && lp.back().is_zero()) lp.pop_back();
}

std::uint64_t pair_key(GenId a, GenId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

struct RegStore {
    std::recursive_mutex mu;
    std::deque<Transseries> gens;
    std::unordered_map<std::size_t, std::vector<GenId>> by_hash;
    std::unordered_map<std::uint64_t, GenId> mul;
    std::unordered_map<GenId, GenId> neg;
    // dominant monomial of L_a - L_b and the sign of its coefficient
    std::unordered_map<std::uint64_t, std::pair<Monomial, int>> lead;
    std::unordered_map<GenId, Transseries> dlog;
};
RegStore& reg() {
    static RegStore s;
    return s;
}
}  // namespace

std::size_t depth_cap() { return g_depth_cap.load(); }
void set_depth_cap(std::size_t d) { g_depth_cap.store(d); }
void check_depth(const Monomial& m) {
    if (m.lp.size() > depth_cap() + 1)
        fail(ErrorKind::DepthCapExceeded, "monomial needs log depth " + std::to_string(m.lp.size() - 1) +
                                              " beyond cap " + std::to_string(depth_cap()));
}

Monomial Monomial::x_pow(const ExponentScalar& a) {
    Monomial m;
    if (!a.is_zero()) m.lp.push_back(a);
    return m;
}
Monomial Monomial::log_atom(std::size_t d, const ExponentScalar& a) {
    Monomial m;
    if (a.is_zero()) return m;
    m.lp.resize(d + 1);
    m.lp[d] = a;
    return m;
}
Monomial Monomial::gen(GenId id) {
    Monomial m;
    m.ex = id;
    return m;
}

bool Monomial::is_log_atom(std::size_t* d) const {
    if (ex || lp.empty() || lp.back() != ExponentScalar(1)) return false;
    for (std::size_t i = 0; i + 1 < lp.size(); ++i)
        if (!lp[i].is_zero()) return false;
    if (d) *d = lp.size() - 1;
    return true;
}

std::size_t Monomial::hash() const {
    std::size_t h = ex * 0x9e3779b97f4a7c15ULL;
    for (auto& a : lp) h = h * 1315423911u ^ a.hash();
    return h;
}

Registry& Registry::instance() {
    static Registry r;
    return r;
}
Registry::Registry() = default;

std::size_t Registry::size() const {
    auto& s = reg();
    std::lock_guard<std::recursive_mutex> lk(s.mu);
    return s.gens.size();
}

const Transseries& Registry::get(GenId id) const {
    auto& s = reg();
    std::lock_guard<std::recursive_mutex> lk(s.mu);
    return s.gens.at(id - 1);
}

GenId Registry::intern(const Transseries& L) {
    if (L.is_zero()) return 0;
    for (auto& t : L.terms())
        if (!is_large(t.m)) fail(ErrorKind::NotPurelyLarge, "exponent has a non-large term");
    Transseries canon = L.exact_part();
    std::size_t h = canon.hash();
    auto& s = reg();
    std::lock_guard<std::recursive_mutex> lk(s.mu);
    auto& bucket = s.by_hash[h];
    for (GenId id : bucket)
        if (s.gens[id - 1].same_as(canon)) return id;
    s.gens.push_back(canon);
    GenId id = static_cast<GenId>(s.gens.size());
    bucket.push_back(id);
    return id;
}

namespace {
GenId gen_sum(GenId a, GenId b) {
    if (!a) return b;
    if (!b) return a;
    if (a > b) std::swap(a, b);
    auto& s = reg();
    {
        std::lock_guard<std::recursive_mutex> lk(s.mu);
        auto it = s.mul.find(pair_key(a, b));
        if (it != s.mul.end()) return it->second;
    }
    auto& r = Registry::instance();
    TruncScope exact{Bound{}};
    GenId id = r.intern(r.get(a) + r.get(b));
    std::lock_guard<std::recursive_mutex> lk(s.mu);
    s.mul[pair_key(a, b)] = id;
    return id;
}

GenId gen_neg(GenId a) {
    if (!a) return 0;
    auto& s = reg();
    {
        std::lock_guard<std::recursive_mutex> lk(s.mu);
        auto it = s.neg.find(a);
        if (it != s.neg.end()) return it->second;
    }
    auto& r = Registry::instance();
    GenId id = r.intern(-r.get(a));
    std::lock_guard<std::recursive_mutex> lk(s.mu);
    s.neg[a] = id;
    s.neg[id] = a;
    return id;
}

std::pair<Monomial, int> gen_lead(GenId a, GenId b) {
    auto& s = reg();
    {
        std::lock_guard<std::recursive_mutex> lk(s.mu);
        auto it = s.lead.find(pair_key(a, b));
        if (it != s.lead.end()) return it->second;
    }
    auto& r = Registry::instance();
    Transseries La = a ? r.get(a) : Transseries();
    Transseries Lb = b ? r.get(b) : Transseries();
    Transseries d = La - Lb;
    const Term& t = d.dominant();
    int sg = sign_of(t.c);
    std::pair<Monomial, int> res{t.m, sg};
    std::lock_guard<std::recursive_mutex> lk(s.mu);
    s.lead[pair_key(a, b)] = res;
    s.lead[pair_key(b, a)] = {t.m, -sg};
    return res;
}
}  // namespace

Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial m;
    m.lp.resize(std::max(a.lp.size(), b.lp.size()));
    for (std::size_t i = 0; i < m.lp.size(); ++i) m.lp[i] = a.exponent(i) + b.exponent(i);
    trim(m.lp);
    m.ex = gen_sum(a.ex, b.ex);
    return m;
}

Monomial inverse(const Monomial& m) {
    Monomial r;
    for (auto& a : m.lp) r.lp.push_back(-a);
    r.ex = gen_neg(m.ex);
    return r;
}

Monomial operator/(const Monomial& a, const Monomial& b) { return a * inverse(b); }

Monomial power(const Monomial& m, const ExponentScalar& a) {
    if (a.is_zero()) return Monomial::one();
    if (a == ExponentScalar(1)) return m;
    Monomial r;
    for (auto& e : m.lp) r.lp.push_back(e * a);
    trim(r.lp);
    if (m.ex) {
        auto& reg = Registry::instance();
        r.ex = reg.intern(reg.get(m.ex).scale(Coefficient(a)));
    }
    return r;
}

std::pair<Monomial, Coefficient> mul_monomial(const Monomial& a, const Monomial& b) {
    return {a * b, Coefficient(1)};
}

int cmp(const Monomial& a, const Monomial& b) {
    std::size_t n = std::max(a.lp.size(), b.lp.size());
    std::size_t dstar = n;
    int dsign = 0;
    for (std::size_t d = 0; d < n; ++d) {
        int c = cmp_scalar(a.exponent(d), b.exponent(d));
        if (c) {
            dstar = d;
            dsign = c;
            break;
        }
    }
    if (a.ex == b.ex) return dsign;
    // log(a/b) = -(La - Lb) + sum_d (a_d - b_d) log^[d+1] x
    auto [lead, sg] = gen_lead(a.ex, b.ex);
    if (dstar == n) return -sg;
    int c = cmp(lead, Monomial::log_atom(dstar + 1));
    return c > 0 ? -sg : dsign;
}

Transseries logderiv_monomial(const Monomial& m) {
    std::vector<Term> ts;
    for (std::size_t d = 0; d < m.lp.size(); ++d) {
        if (m.lp[d].is_zero()) continue;
        Monomial atom;
        atom.lp.assign(d + 1, ExponentScalar(-1));
        ts.push_back({atom, Coefficient(m.lp[d])});
    }
    Transseries r = Transseries::from_terms(std::move(ts));
    if (m.ex) {
        auto& s = reg();
        Transseries dl;
        bool have = false;
        {
            std::lock_guard<std::recursive_mutex> lk(s.mu);
            auto it = s.dlog.find(m.ex);
            if (it != s.dlog.end()) {
                dl = it->second;
                have = true;
            }
        }
        if (!have) {
            TruncScope exact{Bound{}};
            dl = derive(Registry::instance().get(m.ex));
            std::lock_guard<std::recursive_mutex> lk(s.mu);
            s.dlog[m.ex] = dl;
        }
        r = r - dl;
    }
    return r;
}

Coefficient exp_constant(const Coefficient& k) {
    if (k.structurally_zero()) return 1;
    if (!k.is_constant()) fail(ErrorKind::ConstantNotRepresentable, "exponential of a non-constant coefficient");
    auto& tab = SymbolTable::instance();
    ExponentScalar ks = k.to_scalar();
    ExponentScalar erest;
    Coefficient out = 1;
    for (auto& c : ks.coords()) {
        int nlog = 0;
        SymbolId lp = 0;
        ConstantProduct others;
        for (auto& f : c.basis.factors) {
            if (tab.get(f.sym).kind == SymbolKind::LogPrime && f.exp == ExponentScalar(1)) {
                ++nlog;
                lp = f.sym;
            } else {
                others.factors.push_back(f);
            }
        }
        if (nlog == 1) {
            // e^{q B log p} = p^{q B}
            ExponentScalar ex = ExponentScalar::from_terms({{c.value, others}});
            mpz_class p = tab.get(lp).param.get_num();
            std::vector<CoeffTerm> ts;
            for (auto& [r, cp] : rational_power(Rational(p), ex)) ts.push_back({CoeffKey{cp, {}, 0, 0}, r});
            out *= Coefficient::from_terms(std::move(ts));
        } else {
            erest += ExponentScalar::from_terms({{c.value, c.basis}});
        }
    }
    if (!erest.is_zero()) out *= Coefficient::constant(1, single(tab.euler(), erest));
    return out;
}

std::pair<Monomial, Coefficient> intern_exponential(const Transseries& L) {
    Monomial m;
    std::vector<Term> rest;
    Coefficient k;
    for (auto& t : L.terms()) {
        int c = cmp(t.m, Monomial::one());
        if (c < 0) fail(ErrorKind::NotPurelyLarge, "exponent has a small part");
        if (c == 0) {
            k = t.c;
            continue;
        }
        std::size_t d;
        if (t.m.is_log_atom(&d) && d >= 1 && t.c.is_constant()) {
            // e^{-c log^[d] x} = (log^[d-1] x)^{-c}
            if (m.lp.size() < d) m.lp.resize(d);
            m.lp[d - 1] = m.lp[d - 1] - t.c.to_scalar();
            continue;
        }
        rest.push_back(t);
    }
    trim(m.lp);
    if (!L.bound().exact() && L.bound().cut() && !is_small(*L.bound().cut()))
        fail(ErrorKind::TruncationTooCoarse, "exponent known only up to a non-small bound");
    m.ex = Registry::instance().intern(Transseries::from_sorted(std::move(rest)));
    return {m, exp_constant(-k)};
}

}  // namespace tseries
