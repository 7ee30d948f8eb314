#include "tseries/series.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <unordered_map>

namespace tseries {

namespace {
thread_local Bound t_trunc;
std::atomic<std::size_t> g_term_budget{200000};

struct DegCache {
    std::mutex mu;
    std::unordered_map<const Grading*, std::unordered_map<GenId, ExponentScalar>> gen;
};
DegCache& degcache() {
    static DegCache c;
    return c;
}
}  // namespace

const Bound& current_trunc() { return t_trunc; }
TruncScope::TruncScope(Bound b) : saved_(t_trunc) { t_trunc = std::move(b); }
TruncScope::~TruncScope() { t_trunc = std::move(saved_); }

std::size_t term_budget() { return g_term_budget.load(); }
void set_term_budget(std::size_t n) { g_term_budget.store(n); }

// ---- grading

Rational Grading::weight_of(const Monomial& n) const {
    for (auto& [m, w] : gen_w)
        if (m == n) return w;
    return 0;
}

ExponentScalar Grading::degree(const Monomial& m) const {
    ExponentScalar d;
    for (std::size_t i = 0; i < m.lp.size() && i < depth_w.size(); ++i)
        if (depth_w[i] != 0) d = d - m.lp[i] * ExponentScalar(depth_w[i]);
    if (m.ex) {
        auto& c = degcache();
        {
            std::lock_guard<std::mutex> lk(c.mu);
            auto& g = c.gen[this];
            auto it = g.find(m.ex);
            if (it != g.end()) return d + it->second;
        }
        ExponentScalar e;
        for (auto& t : Registry::instance().get(m.ex).terms()) {
            Rational w = weight_of(t.m);
            if (w != 0) e = e + t.c.to_scalar() * ExponentScalar(w);
        }
        std::lock_guard<std::mutex> lk(c.mu);
        c.gen[this][m.ex] = e;
        d = d + e;
    }
    return d;
}

// ---- bounds

Bound Bound::at(const Monomial& cut) {
    Bound b;
    b.cut_ = cut;
    return b;
}
Bound Bound::degree(std::shared_ptr<const Grading> g, const ExponentScalar& max) {
    Bound b;
    b.degs_.push_back({std::move(g), max});
    return b;
}

bool Bound::negligible(const Monomial& m) const {
    for (auto& d : degs_)
        if (cmp_scalar(d.g->degree(m), d.max) > 0) return true;
    return cut_ && cmp(m, *cut_) <= 0;
}

Bound Bound::scaled(const Monomial& m) const {
    Bound b;
    if (cut_) b.cut_ = *cut_ * m;
    for (auto& d : degs_) b.degs_.push_back({d.g, d.max + d.g->degree(m)});
    return b;
}

Bound Bound::operator|(const Bound& o) const {
    Bound b = *this;
    if (o.cut_) b.cut_ = b.cut_ ? max_of(*b.cut_, *o.cut_) : *o.cut_;
    for (auto& d : o.degs_) {
        bool merged = false;
        for (auto& e : b.degs_)
            if (e.g == d.g) {
                if (cmp_scalar(d.max, e.max) < 0) e.max = d.max;
                merged = true;
            }
        if (!merged) b.degs_.push_back(d);
    }
    return b;
}

bool Bound::operator==(const Bound& o) const {
    if (cut_.has_value() != o.cut_.has_value()) return false;
    if (cut_ && *cut_ != *o.cut_) return false;
    if (degs_.size() != o.degs_.size()) return false;
    for (std::size_t i = 0; i < degs_.size(); ++i)
        if (degs_[i].g != o.degs_[i].g || degs_[i].max != o.degs_[i].max) return false;
    return true;
}

// ---- construction

Transseries::Transseries(const Coefficient& c) {
    if (!c.is_zero()) t_.push_back({Monomial::one(), c});
}

Transseries Transseries::x() { return term(1, Monomial::x_pow(1)); }

Transseries Transseries::term(const Coefficient& c, const Monomial& m) {
    Transseries r;
    if (!c.is_zero()) r.t_.push_back({m, c});
    return r;
}

Transseries Transseries::from_sorted(std::vector<Term> ts, Bound b) {
    Transseries r;
    r.t_ = std::move(ts);
    r.b_ = std::move(b);
    if (!r.b_.exact()) {
        std::vector<Term> keep;
        for (auto& t : r.t_)
            if (!r.b_.negligible(t.m)) keep.push_back(std::move(t));
        r.t_ = std::move(keep);
    }
    return r;
}

Transseries Transseries::from_terms(std::vector<Term> ts, Bound b) {
    std::unordered_map<Monomial, std::size_t, MonomialHash> idx;
    std::vector<Term> acc;
    for (auto& t : ts) {
        auto it = idx.find(t.m);
        if (it == idx.end()) {
            idx.emplace(t.m, acc.size());
            acc.push_back(std::move(t));
        } else {
            acc[it->second].c += t.c;
        }
    }
    std::vector<Term> nz;
    for (auto& t : acc)
        if (!t.c.is_zero() && (b.exact() || !b.negligible(t.m))) nz.push_back(std::move(t));
    std::sort(nz.begin(), nz.end(), [](const Term& a, const Term& c) { return cmp(a.m, c.m) > 0; });
    Transseries r;
    r.t_ = std::move(nz);
    r.b_ = std::move(b);
    return r;
}

const Term& Transseries::dominant() const {
    if (t_.empty()) fail(ErrorKind::ZeroSeries, "dominant term of zero series");
    return t_.front();
}

Coefficient Transseries::coeff_of(const Monomial& m) const {
    for (auto& t : t_)
        if (t.m == m) return t.c;
    return {};
}

Transseries Transseries::with_bound(const Bound& b) const { return from_sorted(t_, b_ | b); }
Transseries Transseries::truncated(const Bound& b) const { return with_bound(b); }

// ---- arithmetic

Transseries Transseries::operator+(const Transseries& o) const {
    if (o.t_.empty() && o.b_.exact()) return *this;
    if (t_.empty() && b_.exact()) return o;
    Bound b = b_ | o.b_;
    std::vector<Term> r;
    r.reserve(t_.size() + o.t_.size());
    std::size_t i = 0, j = 0;
    while (i < t_.size() || j < o.t_.size()) {
        int c = i == t_.size() ? -1 : j == o.t_.size() ? 1 : cmp(t_[i].m, o.t_[j].m);
        if (c > 0)
            r.push_back(t_[i++]);
        else if (c < 0)
            r.push_back(o.t_[j++]);
        else {
            Coefficient s = t_[i].c + o.t_[j].c;
            if (!s.is_zero()) r.push_back({t_[i].m, s});
            ++i, ++j;
        }
    }
    return from_sorted(std::move(r), b);
}

Transseries Transseries::operator-() const {
    Transseries r = *this;
    for (auto& t : r.t_) t.c = -t.c;
    return r;
}
Transseries Transseries::operator-(const Transseries& o) const { return *this + (-o); }

Transseries Transseries::scale(const Coefficient& c) const {
    if (c.is_zero()) return from_sorted({}, b_);
    Transseries r = *this;
    for (auto& t : r.t_) t.c *= c;
    return r;
}

Transseries Transseries::scale(const Coefficient& c, const Monomial& m) const {
    std::vector<Term> ts;
    ts.reserve(t_.size());
    if (!c.is_zero())
        for (auto& t : t_) ts.push_back({t.m * m, t.c * c});
    return from_sorted(std::move(ts), b_.scaled(m));
}

Transseries Transseries::operator*(const Transseries& o) const {
    const Bound& T = current_trunc();
    Bound b;
    if (!b_.exact() && !o.t_.empty()) b = b | scaled_by(b_, o);
    if (!o.b_.exact() && !t_.empty()) b = b | scaled_by(o.b_, *this);
    if (t_.empty() || o.t_.empty()) {
        if (t_.empty() && o.t_.empty() && b_.cut() && o.b_.cut()) b = b | Bound::at(*b_.cut() * *o.b_.cut());
        return from_sorted({}, b);
    }
    Bound all = b | T;
    std::optional<Monomial> cut = all.cut();
    bool dropped = false;
    std::unordered_map<Monomial, std::size_t, MonomialHash> idx;
    std::vector<Term> acc;
    for (auto& a : t_) {
        for (auto& c : o.t_) {
            Monomial m = a.m * c.m;
            if (cut && cmp(m, *cut) <= 0) {
                dropped = true;
                break;
            }
            if (!all.degrees().empty() && all.negligible(m)) {
                dropped = true;
                continue;
            }
            Coefficient k = a.c * c.c;
            auto it = idx.find(m);
            if (it == idx.end()) {
                idx.emplace(m, acc.size());
                acc.push_back({std::move(m), std::move(k)});
            } else {
                acc[it->second].c += k;
            }
        }
        if (acc.size() > term_budget()) fail(ErrorKind::BudgetExhausted, "product exceeds term budget");
    }
    if (dropped) b = b | T;
    return from_terms(std::move(acc), b);
}

bool Transseries::same_as(const Transseries& o) const {
    if (t_.size() != o.t_.size() || !(b_ == o.b_)) return false;
    for (std::size_t i = 0; i < t_.size(); ++i)
        if (t_[i].m != o.t_[i].m || !(t_[i].c - o.t_[i].c).structurally_zero()) return false;
    return true;
}

std::size_t Transseries::hash() const {
    std::size_t h = 0xabc;
    for (auto& t : t_) h = h * 1000003 ^ (t.m.hash() * 7 + t.c.hash());
    return h;
}

// ---- structure

Split split(const Transseries& a) {
    std::vector<Term> large, small;
    Split s;
    for (auto& t : a.terms()) {
        int c = cmp(t.m, Monomial::one());
        if (c > 0)
            large.push_back(t);
        else if (c == 0)
            s.constant = t.c;
        else
            small.push_back(t);
    }
    s.large = Transseries::from_sorted(std::move(large));
    s.small = Transseries::from_sorted(std::move(small), a.bound());
    return s;
}

namespace {
// log m = -L + sum_d a_d log^[d+1] x, unchecked against the depth cap
Transseries log_of(const Monomial& m) {
    std::vector<Term> ts;
    for (std::size_t d = 0; d < m.lp.size(); ++d)
        if (!m.lp[d].is_zero()) ts.push_back({Monomial::log_atom(d + 1), Coefficient(m.lp[d])});
    Transseries r = Transseries::from_terms(std::move(ts));
    if (m.ex) r = r - Registry::instance().get(m.ex);
    return r;
}

// some power of u falls below the truncation
bool reaches(const Bound& T, const Transseries& u) {
    for (auto& d : T.degrees()) {
        bool all = true;
        for (auto& t : u.terms())
            if (sign_of(d.g->degree(t.m)) <= 0) {
                all = false;
                break;
            }
        if (all) return true;
    }
    if (!T.cut()) return false;
    Transseries lc = log_of(*T.cut());
    if (lc.is_zero()) return true;
    return cmp(lc.mag(), log_of(u.mag()).mag()) <= 0;
}
}  // namespace

Transseries power_series(const Transseries& u, const std::function<Coefficient(unsigned)>& coef) {
    Transseries sum = coef(0);
    if (u.is_zero() && u.exact()) return sum;
    if (!u.is_zero() && !is_small(u.mag())) fail(ErrorKind::SemanticError, "expansion point is not small");
    if (current_trunc().exact() && !u.is_zero())
        fail(ErrorKind::TruncationTooCoarse, "infinite expansion without a truncation");
    if (!u.is_zero() && !reaches(current_trunc(), u))
        fail(ErrorKind::TruncationTooCoarse, "expansion never reaches the truncation");
    Transseries p = 1;
    for (unsigned n = 1;; ++n) {
        p = p * u;
        Coefficient a = coef(n);
        if (!a.is_zero() || !p.exact()) sum += p.scale(a.is_zero() ? Coefficient(0) : a);
        if (p.is_zero()) break;
        if (n > 100000) fail(ErrorKind::BudgetExhausted, "power series does not terminate");
    }
    return sum;
}

namespace {
struct Unit {
    Coefficient c;
    Monomial m;
    Transseries u;  // a = c m (1 + u)
};
Unit unit_form(const Transseries& a) {
    const Term& d = a.dominant();
    Coefficient ci = invert_coefficient(d.c);
    Transseries rest = Transseries::from_sorted(std::vector<Term>(a.terms().begin() + 1, a.terms().end()), a.bound());
    return {d.c, d.m, rest.scale(ci, inverse(d.m))};
}
}  // namespace

Transseries invert_unit(const Transseries& a) {
    if (a.is_zero()) fail(ErrorKind::ZeroSeries, "inverse of zero series");
    const Term& d = a.dominant();
    if (d.c.has_params()) fail(ErrorKind::NonInvertibleCoefficient, "leading coefficient " + to_string(d.c) + " is not a unit");
    Unit un = unit_form(a);
    Coefficient ci = invert_coefficient(un.c);
    Monomial mi = inverse(un.m);
    Transseries s;
    {
        TruncScope rel(current_trunc().scaled(un.m));
        s = power_series(un.u, [](unsigned n) { return Coefficient(n % 2 ? -1 : 1); });
    }
    return s.scale(ci, mi);
}

Transseries pow_real(const Transseries& a, const ExponentScalar& e) {
    if (e.is_zero()) return 1;
    if (e == ExponentScalar(1)) return a;
    if (a.is_zero()) fail(ErrorKind::ZeroSeries, "power of zero series");
    if (e.is_rational() && e.as_rational().get_den() == 1 && e.as_rational() > 0 && e.as_rational() < 16) {
        long n = e.as_rational().get_num().get_si();
        const Bound T = current_trunc();
        Transseries r = a;
        for (long i = 1; i < n; ++i) {
            // a^{i+1} is later multiplied by a^{n-i-1}
            Bound rel = T;
            if (!T.exact() && n - i - 1 > 0) {
                if (T.cut()) rel = Bound::at(*T.cut() * power(inverse(a.mag()), n - i - 1));
                else rel = Bound();
                for (auto& d : T.degrees())
                    rel = rel | Bound::degree(d.g, d.max - min_degree(*d.g, a) * ExponentScalar(n - i - 1));
            }
            TruncScope ts(rel);
            r = r * a;
        }
        return r;
    }
    Unit un = unit_form(a);
    Coefficient ce = pow_coefficient(un.c, e);
    Monomial me = power(un.m, e);
    Transseries s;
    {
        TruncScope rel(current_trunc().scaled(inverse(me)));
        Coefficient ec(e);
        std::vector<Coefficient> bin{Coefficient(1)};
        s = power_series(un.u, [&](unsigned n) {
            while (bin.size() <= n) {
                unsigned k = static_cast<unsigned>(bin.size());
                bin.push_back(bin.back() * (ec - Coefficient(static_cast<long>(k) - 1)) * Coefficient(Rational(1, k)));
            }
            return bin[n];
        });
    }
    return s.scale(ce, me);
}

ExponentScalar min_degree(const Grading& g, const Transseries& s) {
    ExponentScalar lo;
    bool first = true;
    for (auto& t : s.terms()) {
        ExponentScalar d = g.degree(t.m);
        if (first || cmp_scalar(d, lo) < 0) lo = d;
        first = false;
    }
    return lo;
}

Bound scaled_by(const Bound& b, const Transseries& s) {
    if (s.is_zero()) return b;
    Bound r;
    if (b.cut()) r = Bound::at(*b.cut() * s.mag());
    for (auto& d : b.degrees()) r = r | Bound::degree(d.g, d.max + min_degree(*d.g, s));
    return r;
}

Bound relative_to(const Bound& b, const Transseries& s) {
    if (s.is_zero()) return b;
    Bound r;
    if (b.cut()) r = Bound::at(*b.cut() * inverse(s.mag()));
    for (auto& d : b.degrees()) r = r | Bound::degree(d.g, d.max - min_degree(*d.g, s));
    return r;
}

int compare_asymptotic(const Transseries& a, const Transseries& b) { return cmp(a.mag(), b.mag()); }

bool is_large_positive(const Transseries& a) {
    if (a.is_zero()) return false;
    return is_large(a.mag()) && sign_of(a.dominant().c) > 0;
}

Transseries truncate_to(const Transseries& a, const Monomial& cut) { return a.with_bound(Bound::at(cut)); }

bool equal_to_bound(const Transseries& a, const Transseries& b) { return (a - b).is_zero(); }

}  // namespace tseries
