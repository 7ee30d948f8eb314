#include "tseries/exactnum.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>

namespace tseries {

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::OrderUndecidable: return "OrderUndecidable";
        case ErrorKind::SignUndecidable: return "SignUndecidable";
        case ErrorKind::UnboundParameter: return "UnboundParameter";
        case ErrorKind::DepthCapExceeded: return "DepthCapExceeded";
        case ErrorKind::NotPurelyLarge: return "NotPurelyLarge";
        case ErrorKind::ZeroSeries: return "ZeroSeries";
        case ErrorKind::NonInvertibleCoefficient: return "NonInvertibleCoefficient";
        case ErrorKind::NonConstantLeadingCoefficient: return "NonConstantLeadingCoefficient";
        case ErrorKind::NegativeBase: return "NegativeBase";
        case ErrorKind::ConstantNotRepresentable: return "ConstantNotRepresentable";
        case ErrorKind::LogConstantNotDeclared: return "LogConstantNotDeclared";
        case ErrorKind::NonIntegrableAtCut: return "NonIntegrableAtCut";
        case ErrorKind::NotLargePositive: return "NotLargePositive";
        case ErrorKind::NoProgress: return "NoProgress";
        case ErrorKind::NotNearIdentity: return "NotNearIdentity";
        case ErrorKind::IdentitySeries: return "IdentitySeries";
        case ErrorKind::TruncationTooCoarse: return "TruncationTooCoarse";
        case ErrorKind::Unstabilized: return "Unstabilized";
        case ErrorKind::WrongClass: return "WrongClass";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::DeepNoCommonSupport: return "DeepNoCommonSupport";
        case ErrorKind::NotPurelyDeepNormalForm: return "NotPurelyDeepNormalForm";
        case ErrorKind::NoContraction: return "NoContraction";
        case ErrorKind::ReductionNotPurelyDeep: return "ReductionNotPurelyDeep";
        case ErrorKind::NotCommuting: return "NotCommuting";
        case ErrorKind::VerificationFailed: return "VerificationFailed";
        case ErrorKind::BudgetExhausted: return "BudgetExhausted";
        case ErrorKind::SyntaxError: return "SyntaxError";
        case ErrorKind::SemanticError: return "SemanticError";
        case ErrorKind::Unsupported: return "Unsupported";
    }
    return "Error";
}

Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    auto dot = s.find('.');
    if (dot != std::string::npos && slash == std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        mpz_class den = 1;
        for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
        Rational q(mpz_class(digits.empty() ? "0" : digits), den);
        q.canonicalize();
        return q;
    }
    Rational q(s);
    q.canonicalize();
    return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

std::size_t hash_rational(const Rational& q) {
    std::size_t h = mpz_size(q.get_num_mpz_t()) ? mpz_getlimbn(q.get_num_mpz_t(), 0) : 0;
    h ^= (mpz_size(q.get_den_mpz_t()) ? mpz_getlimbn(q.get_den_mpz_t(), 0) : 0) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::size_t>(mpz_sgn(q.get_num_mpz_t()) + 7) << 3;
    return h;
}

// ---- Real / Interval

Real::Real(mpfr_prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
    live_ = true;
}
Real::Real(const Real& o) {
    mpfr_init2(v_, o.prec());
    mpfr_set(v_, o.v_, MPFR_RNDN);
    live_ = true;
}
Real::Real(Real&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
    live_ = true;
}
Real& Real::operator=(const Real& o) {
    if (this != &o) {
        mpfr_set_prec(v_, o.prec());
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
}
Real& Real::operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
}
Real::~Real() {
    if (live_) mpfr_clear(v_);
}

Interval::Interval(mpfr_prec_t prec) : lo_(prec), hi_(prec) {}

Interval Interval::of(const Rational& q, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set_q(r.lo_.get(), q.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(r.hi_.get(), q.get_mpq_t(), MPFR_RNDU);
    return r;
}

Interval Interval::hull(const Real& a, const Real& b) {
    Interval r(std::max(a.prec(), b.prec()));
    if (mpfr_cmp(a.get(), b.get()) <= 0) {
        mpfr_set(r.lo_.get(), a.get(), MPFR_RNDD);
        mpfr_set(r.hi_.get(), b.get(), MPFR_RNDU);
    } else {
        mpfr_set(r.lo_.get(), b.get(), MPFR_RNDD);
        mpfr_set(r.hi_.get(), a.get(), MPFR_RNDU);
    }
    return r;
}

bool Interval::contains_zero() const { return mpfr_sgn(lo_.get()) <= 0 && mpfr_sgn(hi_.get()) >= 0; }
bool Interval::positive() const { return mpfr_sgn(lo_.get()) > 0; }
bool Interval::negative() const { return mpfr_sgn(hi_.get()) < 0; }
int Interval::sign() const { return positive() ? 1 : negative() ? -1 : 0; }
double Interval::mid() const { return 0.5 * (lo_.to_double() + hi_.to_double()); }
double Interval::width() const { return hi_.to_double() - lo_.to_double(); }
bool Interval::contains(double v) const {
    return mpfr_cmp_d(lo_.get(), v) <= 0 && mpfr_cmp_d(hi_.get(), v) >= 0;
}

Interval Interval::operator+(const Interval& o) const {
    Interval r(std::max(prec(), o.prec()));
    mpfr_add(r.lo_.get(), lo_.get(), o.lo_.get(), MPFR_RNDD);
    mpfr_add(r.hi_.get(), hi_.get(), o.hi_.get(), MPFR_RNDU);
    return r;
}
Interval Interval::operator-(const Interval& o) const {
    Interval r(std::max(prec(), o.prec()));
    mpfr_sub(r.lo_.get(), lo_.get(), o.hi_.get(), MPFR_RNDD);
    mpfr_sub(r.hi_.get(), hi_.get(), o.lo_.get(), MPFR_RNDU);
    return r;
}
Interval Interval::operator-() const {
    Interval r(prec());
    mpfr_neg(r.lo_.get(), hi_.get(), MPFR_RNDD);
    mpfr_neg(r.hi_.get(), lo_.get(), MPFR_RNDU);
    return r;
}
Interval Interval::operator*(const Interval& o) const {
    auto p = std::max(prec(), o.prec());
    Interval r(p);
    Real t(p);
    const Real* as[2] = {&lo_, &hi_};
    const Real* bs[2] = {&o.lo_, &o.hi_};
    bool first = true;
    for (auto* a : as)
        for (auto* b : bs) {
            mpfr_mul(t.get(), a->get(), b->get(), MPFR_RNDD);
            if (first || mpfr_cmp(t.get(), r.lo_.get()) < 0) mpfr_set(r.lo_.get(), t.get(), MPFR_RNDD);
            mpfr_mul(t.get(), a->get(), b->get(), MPFR_RNDU);
            if (first || mpfr_cmp(t.get(), r.hi_.get()) > 0) mpfr_set(r.hi_.get(), t.get(), MPFR_RNDU);
            first = false;
        }
    return r;
}
Interval Interval::operator/(const Interval& o) const {
    auto p = std::max(prec(), o.prec());
    Interval inv(p);
    if (o.contains_zero()) {
        mpfr_set_inf(inv.lo_.get(), -1);
        mpfr_set_inf(inv.hi_.get(), 1);
        return inv;
    }
    mpfr_ui_div(inv.lo_.get(), 1, o.hi_.get(), MPFR_RNDD);
    mpfr_ui_div(inv.hi_.get(), 1, o.lo_.get(), MPFR_RNDU);
    return *this * inv;
}
Interval Interval::exp() const {
    Interval r(prec());
    mpfr_exp(r.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_exp(r.hi_.get(), hi_.get(), MPFR_RNDU);
    return r;
}
Interval Interval::log() const {
    Interval r(prec());
    if (mpfr_sgn(lo_.get()) <= 0)
        mpfr_set_inf(r.lo_.get(), -1);
    else
        mpfr_log(r.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_log(r.hi_.get(), hi_.get(), MPFR_RNDU);
    return r;
}
Interval Interval::pow(const Interval& e) const { return (e * log()).exp(); }
Interval Interval::powi(long n) const {
    if (n < 0) return Interval::of(1, prec()) / powi(-n);
    Interval r = Interval::of(1, prec());
    Interval b = *this;
    while (n) {
        if (n & 1) r = r * b;
        n >>= 1;
        if (n) b = b * b;
    }
    return r;
}

// ---- symbols

namespace {
struct SymbolStore {
    std::mutex mu;
    std::vector<ConstantSymbol> syms;
    std::map<std::pair<int, Rational>, SymbolId> index;
    std::map<std::pair<SymbolId, mpfr_prec_t>, Interval> cache;
};
SymbolStore& store() {
    static SymbolStore s;
    return s;
}
std::atomic<long> g_precision{256};
}  // namespace

mpfr_prec_t compare_precision() { return g_precision.load(); }
void set_compare_precision(mpfr_prec_t bits) { g_precision.store(bits < 64 ? 64 : bits); }

SymbolTable& SymbolTable::instance() {
    static SymbolTable t;
    return t;
}
SymbolTable::SymbolTable() { intern(SymbolKind::Euler, 0, "e"); }

SymbolId SymbolTable::intern(SymbolKind k, const Rational& p, std::string name) {
    auto& s = store();
    std::lock_guard<std::mutex> lk(s.mu);
    auto key = std::make_pair(static_cast<int>(k), p);
    auto it = s.index.find(key);
    if (it != s.index.end()) return it->second;
    SymbolId id = static_cast<SymbolId>(s.syms.size());
    s.syms.push_back({k, p, std::move(name)});
    s.index.emplace(key, id);
    return id;
}
SymbolId SymbolTable::euler() { return 0; }
SymbolId SymbolTable::prime(const mpz_class& p) { return intern(SymbolKind::Prime, Rational(p), p.get_str()); }
SymbolId SymbolTable::log_prime(const mpz_class& p) {
    return intern(SymbolKind::LogPrime, Rational(p), "log(" + p.get_str() + ")");
}
SymbolId SymbolTable::kappa(const Rational& q) {
    return intern(SymbolKind::Kappa, q, "1/(exp(" + q.get_str() + ")-1)");
}
ConstantSymbol SymbolTable::get(SymbolId id) const {
    auto& s = store();
    std::lock_guard<std::mutex> lk(s.mu);
    return s.syms.at(id);
}
std::vector<SymbolId> SymbolTable::kappas() const {
    auto& s = store();
    std::lock_guard<std::mutex> lk(s.mu);
    std::vector<SymbolId> out;
    for (SymbolId i = 0; i < s.syms.size(); ++i)
        if (s.syms[i].kind == SymbolKind::Kappa) out.push_back(i);
    return out;
}

Interval SymbolTable::enclosure(SymbolId id, mpfr_prec_t prec) const {
    auto& s = store();
    {
        std::lock_guard<std::mutex> lk(s.mu);
        auto it = s.cache.find({id, prec});
        if (it != s.cache.end()) return it->second;
    }
    ConstantSymbol sym = get(id);
    Interval r(prec);
    switch (sym.kind) {
        case SymbolKind::Euler:
            r = Interval::of(1, prec).exp();
            break;
        case SymbolKind::Prime:
            r = Interval::of(sym.param, prec);
            break;
        case SymbolKind::LogPrime:
            r = Interval::of(sym.param, prec).log();
            break;
        case SymbolKind::Kappa:
            r = Interval::of(1, prec) / (Interval::of(sym.param, prec).exp() - Interval::of(1, prec));
            break;
    }
    std::lock_guard<std::mutex> lk(s.mu);
    s.cache.emplace(std::make_pair(id, prec), r);
    return r;
}

// ---- structural comparisons

bool ConstantProduct::operator==(const ConstantProduct& o) const { return compare_structural(*this, o) == 0; }

std::size_t ConstantProduct::hash() const {
    std::size_t h = 0x51ed;
    for (auto& f : factors) h = h * 1000003 ^ (f.sym * 7919 + f.exp.hash());
    return h;
}

int compare_structural(const ConstantProduct& a, const ConstantProduct& b) {
    std::size_t n = std::min(a.factors.size(), b.factors.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.factors[i].sym != b.factors[i].sym) return a.factors[i].sym < b.factors[i].sym ? -1 : 1;
        int c = compare_structural(a.factors[i].exp, b.factors[i].exp);
        if (c) return c;
    }
    if (a.factors.size() != b.factors.size()) return a.factors.size() < b.factors.size() ? -1 : 1;
    return 0;
}

int compare_structural(const ExponentScalar& a, const ExponentScalar& b) {
    auto& x = a.coords();
    auto& y = b.coords();
    std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i) {
        int c = compare_structural(x[i].basis, y[i].basis);
        if (c) return c;
        c = cmp(x[i].value, y[i].value);
        if (c) return c < 0 ? -1 : 1;
    }
    if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
    return 0;
}

// ---- normalization of constant products

namespace {

using FactorMap = std::map<SymbolId, ExponentScalar>;

Rational rpow(const mpz_class& p, const mpz_class& e) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), mpz_class(abs(e)).get_ui());
    return e < 0 ? Rational(mpz_class(1), r) : Rational(r);
}

ConstantProduct to_product(const FactorMap& m) {
    ConstantProduct p;
    for (auto& [s, e] : m)
        if (!e.is_zero()) p.factors.push_back({s, e});
    return p;
}

void normalize_into(Rational r, FactorMap f, std::vector<std::pair<Rational, ConstantProduct>>& out) {
    if (r == 0) return;
    auto& tab = SymbolTable::instance();
    std::vector<std::pair<SymbolId, long>> neg_kappa;
    std::vector<std::pair<SymbolId, Rational>> kappas;
    for (auto it = f.begin(); it != f.end();) {
        if (it->second.is_zero()) {
            it = f.erase(it);
            continue;
        }
        ConstantSymbol sym = tab.get(it->first);
        if (sym.kind == SymbolKind::Prime) {
            Rational q = it->second.rational_part();
            mpz_class fl;
            mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
            if (fl != 0) {
                r *= rpow(sym.param.get_num(), fl);
                it->second = it->second - ExponentScalar(Rational(fl));
            }
            if (it->second.is_zero()) {
                it = f.erase(it);
                continue;
            }
        } else if (sym.kind == SymbolKind::Kappa) {
            if (!it->second.is_rational() || it->second.as_rational().get_den() != 1)
                fail(ErrorKind::ConstantNotRepresentable, "non-integer power of " + sym.name);
            long n = it->second.as_rational().get_num().get_si();
            if (n < 0) {
                neg_kappa.push_back({it->first, -n});
                it = f.erase(it);
                continue;
            }
            kappas.push_back({it->first, sym.param});
        }
        ++it;
    }
    if (!neg_kappa.empty()) {
        // kappa^-n = (e^q - 1)^n
        auto [ks, n] = neg_kappa.front();
        Rational q = tab.get(ks).param;
        FactorMap rest = f;
        for (std::size_t i = 1; i < neg_kappa.size(); ++i)
            rest[neg_kappa[i].first] = ExponentScalar(Rational(-neg_kappa[i].second));
        mpz_class binom = 1;
        for (long k = 0; k <= n; ++k) {
            FactorMap g = rest;
            g[tab.euler()] = g[tab.euler()] + ExponentScalar(q * k);
            Rational coef = r * Rational(binom) * (((n - k) % 2) ? -1 : 1);
            normalize_into(coef, g, out);
            binom = binom * (n - k) / (k + 1);
        }
        return;
    }
    if (!kappas.empty()) {
        auto best = *std::min_element(kappas.begin(), kappas.end(),
                                      [](auto& a, auto& b) { return a.second < b.second; });
        auto eit = f.find(tab.euler());
        Rational t = eit == f.end() ? Rational(0) : eit->second.rational_part();
        SymbolId ks = best.first;
        const Rational& p = best.second;
        if (t >= p) {
            // e^p kappa = 1 + kappa
            FactorMap a = f;
            a[tab.euler()] = a[tab.euler()] - ExponentScalar(p);
            FactorMap b = a;
            b[ks] = b[ks] - ExponentScalar(1);
            normalize_into(r, b, out);
            normalize_into(r, a, out);
            return;
        }
        if (t < 0) {
            // e^t kappa = e^{t+p} kappa - e^t
            FactorMap a = f;
            a[tab.euler()] = a[tab.euler()] + ExponentScalar(p);
            FactorMap b = f;
            b[ks] = b[ks] - ExponentScalar(1);
            normalize_into(r, a, out);
            normalize_into(-r, b, out);
            return;
        }
    }
    out.push_back({r, to_product(f)});
}

FactorMap to_map(const ConstantProduct& p) {
    FactorMap m;
    for (auto& f : p.factors) m.emplace(f.sym, f.exp);
    return m;
}

}  // namespace

std::vector<std::pair<Rational, ConstantProduct>> normalize(Rational r, const ConstantProduct& p) {
    std::vector<std::pair<Rational, ConstantProduct>> out;
    normalize_into(std::move(r), to_map(p), out);
    return out;
}

std::vector<std::pair<Rational, ConstantProduct>> product(const ConstantProduct& a,
                                                          const ConstantProduct& b) {
    if (b.empty()) return {{Rational(1), a}};
    if (a.empty()) return {{Rational(1), b}};
    FactorMap m = to_map(a);
    for (auto& f : b.factors) {
        auto it = m.find(f.sym);
        if (it == m.end())
            m.emplace(f.sym, f.exp);
        else
            it->second = it->second + f.exp;
    }
    std::vector<std::pair<Rational, ConstantProduct>> out;
    normalize_into(1, std::move(m), out);
    return out;
}

ConstantProduct single(SymbolId s, const ExponentScalar& e) {
    ConstantProduct p;
    if (!e.is_zero()) p.factors.push_back({s, e});
    return p;
}

ConstantProduct power(const ConstantProduct& p, const ExponentScalar& e) {
    ConstantProduct r;
    for (auto& f : p.factors) {
        ExponentScalar x = f.exp * e;
        if (!x.is_zero()) r.factors.push_back({f.sym, x});
    }
    return r;
}

std::pair<Rational, ConstantProduct> exp_rational(const Rational& q) {
    return {Rational(1), single(SymbolTable::instance().euler(), ExponentScalar(q))};
}

namespace {
std::vector<std::pair<mpz_class, long>> factorize(mpz_class n) {
    std::vector<std::pair<mpz_class, long>> out;
    for (unsigned long p = 2; p < 100000 && n > 1; ++p) {
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            long k = 0;
            while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
                n /= p;
                ++k;
            }
            out.push_back({mpz_class(p), k});
        }
        if (mpz_cmp_ui(n.get_mpz_t(), p * p) < 0 && n > 1) {
            out.push_back({n, 1});
            n = 1;
        }
    }
    if (n > 1) {
        if (!mpz_probab_prime_p(n.get_mpz_t(), 30))
            fail(ErrorKind::ConstantNotRepresentable, "cannot factor " + n.get_str());
        out.push_back({n, 1});
    }
    return out;
}
}  // namespace

std::vector<std::pair<Rational, ConstantProduct>> rational_power(const Rational& r, const ExponentScalar& e) {
    if (r <= 0) fail(ErrorKind::NegativeBase, "power of non-positive rational " + r.get_str());
    if (e.is_rational() && e.as_rational().get_den() == 1) {
        long n = e.as_rational().get_num().get_si();
        Rational x = 1;
        for (long i = 0; i < std::labs(n); ++i) x *= r;
        if (n < 0) x = 1 / x;
        return {{x, ConstantProduct{}}};
    }
    auto& tab = SymbolTable::instance();
    FactorMap m;
    for (auto& [p, k] : factorize(r.get_num())) m[tab.prime(p)] = m[tab.prime(p)] + e * ExponentScalar(k);
    for (auto& [p, k] : factorize(r.get_den())) m[tab.prime(p)] = m[tab.prime(p)] - e * ExponentScalar(k);
    std::vector<std::pair<Rational, ConstantProduct>> out;
    normalize_into(1, std::move(m), out);
    return out;
}

ExponentScalar log_rational(const Rational& r) {
    if (r <= 0) fail(ErrorKind::NegativeBase, "log of non-positive rational " + r.get_str());
    auto& tab = SymbolTable::instance();
    std::vector<std::pair<Rational, ConstantProduct>> ts;
    for (auto& [p, k] : factorize(r.get_num())) ts.push_back({Rational(k), single(tab.log_prime(p), 1)});
    for (auto& [p, k] : factorize(r.get_den())) ts.push_back({Rational(-k), single(tab.log_prime(p), 1)});
    return ExponentScalar::from_terms(std::move(ts));
}

// ---- ExponentScalar

ExponentScalar::ExponentScalar() = default;
ExponentScalar::ExponentScalar(const Rational& q) {
    if (q != 0) c_.push_back({ConstantProduct{}, q});
}
ExponentScalar::ExponentScalar(long q) : ExponentScalar(Rational(q)) {}

ExponentScalar ExponentScalar::from_terms(std::vector<std::pair<Rational, ConstantProduct>> ts) {
    std::vector<std::pair<Rational, ConstantProduct>> norm;
    for (auto& [r, p] : ts) {
        bool simple = true;
        for (auto& f : p.factors) {
            auto k = SymbolTable::instance().get(f.sym).kind;
            if (k == SymbolKind::Prime || k == SymbolKind::Kappa) simple = false;
        }
        if (simple)
            norm.push_back({r, p});
        else
            normalize_into(r, to_map(p), norm);
    }
    std::sort(norm.begin(), norm.end(),
              [](auto& a, auto& b) { return compare_structural(a.second, b.second) < 0; });
    ExponentScalar out;
    for (auto& [r, p] : norm) {
        if (!out.c_.empty() && compare_structural(out.c_.back().basis, p) == 0)
            out.c_.back().value += r;
        else
            out.c_.push_back({p, r});
        if (out.c_.back().value == 0) out.c_.pop_back();
    }
    return out;
}

bool ExponentScalar::is_rational() const { return c_.empty() || (c_.size() == 1 && c_[0].basis.empty()); }
Rational ExponentScalar::rational_part() const {
    for (auto& c : c_)
        if (c.basis.empty()) return c.value;
    return 0;
}
Rational ExponentScalar::as_rational() const { return c_.empty() ? Rational(0) : c_[0].value; }

ExponentScalar ExponentScalar::operator+(const ExponentScalar& o) const {
    ExponentScalar r;
    std::size_t i = 0, j = 0;
    while (i < c_.size() || j < o.c_.size()) {
        int c = i == c_.size() ? 1 : j == o.c_.size() ? -1 : compare_structural(c_[i].basis, o.c_[j].basis);
        if (c < 0)
            r.c_.push_back(c_[i++]);
        else if (c > 0)
            r.c_.push_back(o.c_[j++]);
        else {
            Rational v = c_[i].value + o.c_[j].value;
            if (v != 0) r.c_.push_back({c_[i].basis, v});
            ++i, ++j;
        }
    }
    return r;
}
ExponentScalar ExponentScalar::operator-() const {
    ExponentScalar r = *this;
    for (auto& c : r.c_) c.value = -c.value;
    return r;
}
ExponentScalar ExponentScalar::operator-(const ExponentScalar& o) const { return *this + (-o); }
ExponentScalar ExponentScalar::operator*(const ExponentScalar& o) const {
    if (is_rational() && o.is_rational()) return ExponentScalar(as_rational() * o.as_rational());
    if (is_rational()) {
        Rational q = as_rational();
        if (q == 0) return {};
        ExponentScalar r = o;
        for (auto& c : r.c_) c.value *= q;
        return r;
    }
    if (o.is_rational()) return o * *this;
    std::vector<std::pair<Rational, ConstantProduct>> ts;
    for (auto& a : c_)
        for (auto& b : o.c_)
            for (auto& [r, p] : product(a.basis, b.basis)) ts.push_back({r * a.value * b.value, std::move(p)});
    return from_terms(std::move(ts));
}
bool ExponentScalar::operator==(const ExponentScalar& o) const { return compare_structural(*this, o) == 0; }

std::size_t ExponentScalar::hash() const {
    std::size_t h = 0x2545;
    for (auto& c : c_) h = h * 31 ^ (c.basis.hash() * 17 + hash_rational(c.value));
    return h;
}

Interval enclose(const ConstantProduct& p, mpfr_prec_t prec) {
    Interval r = Interval::of(1, prec);
    for (auto& f : p.factors) {
        Interval s = SymbolTable::instance().enclosure(f.sym, prec);
        if (f.exp.is_rational() && f.exp.as_rational().get_den() == 1)
            r = r * s.powi(f.exp.as_rational().get_num().get_si());
        else
            r = r * s.pow(f.exp.enclose(prec));
    }
    return r;
}

Interval ExponentScalar::enclose(mpfr_prec_t prec) const {
    Interval r = Interval::of(0, prec);
    for (auto& c : c_) r = r + Interval::of(c.value, prec) * tseries::enclose(c.basis, prec);
    return r;
}

int sign_of(const ExponentScalar& a) {
    if (a.is_rational()) return sgn(a.as_rational());
    for (mpfr_prec_t p = 64;; p *= 2) {
        if (p > compare_precision()) p = compare_precision();
        int s = a.enclose(p).sign();
        if (s) return s;
        if (p >= compare_precision()) break;
    }
    fail(ErrorKind::OrderUndecidable, "cannot separate scalar from zero");
}

int cmp_scalar(const ExponentScalar& a, const ExponentScalar& b) {
    if (a.is_rational() && b.is_rational()) {
        int c = cmp(a.as_rational(), b.as_rational());
        return c < 0 ? -1 : c > 0 ? 1 : 0;
    }
    ExponentScalar d = a - b;
    if (d.is_zero()) return 0;
    return sign_of(d);
}

// ---- parameters

namespace {
struct ParamStore {
    std::mutex mu;
    std::vector<std::string> names;
    std::map<std::string, ParamId> index;
};
ParamStore& pstore() {
    static ParamStore s;
    return s;
}
}  // namespace

ParamTable& ParamTable::instance() {
    static ParamTable t;
    return t;
}
ParamId ParamTable::declare(const std::string& name) {
    auto& s = pstore();
    std::lock_guard<std::mutex> lk(s.mu);
    auto it = s.index.find(name);
    if (it != s.index.end()) return it->second;
    ParamId id = static_cast<ParamId>(s.names.size());
    s.names.push_back(name);
    s.index.emplace(name, id);
    return id;
}
std::optional<ParamId> ParamTable::find(const std::string& name) const {
    auto& s = pstore();
    std::lock_guard<std::mutex> lk(s.mu);
    auto it = s.index.find(name);
    if (it == s.index.end()) return std::nullopt;
    return it->second;
}
std::string ParamTable::name(ParamId id) const {
    auto& s = pstore();
    std::lock_guard<std::mutex> lk(s.mu);
    return s.names.at(id);
}

// ---- Coefficient

int compare_key(const CoeffKey& a, const CoeffKey& b) {
    int c = compare_structural(a.cp, b.cp);
    if (c) return c;
    if (a.params != b.params) return a.params < b.params ? -1 : 1;
    if (a.sdeg != b.sdeg) return a.sdeg < b.sdeg ? -1 : 1;
    c = cmp(a.srate, b.srate);
    return c < 0 ? -1 : c > 0 ? 1 : 0;
}

namespace {
ParamPowers merge_params(const ParamPowers& a, const ParamPowers& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    ParamPowers r;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
            r.push_back(a[i++]);
        else if (i == a.size() || b[j].first < a[i].first)
            r.push_back(b[j++]);
        else {
            r.push_back({a[i].first, a[i].second + b[j].second});
            ++i, ++j;
        }
    }
    return r;
}

bool needs_normalize(const ConstantProduct& p) {
    for (auto& f : p.factors) {
        auto k = SymbolTable::instance().get(f.sym).kind;
        if (k == SymbolKind::Prime || k == SymbolKind::Kappa) return true;
    }
    return false;
}
}  // namespace

Coefficient::Coefficient(const Rational& q) {
    if (q != 0) t_.push_back({CoeffKey{}, q});
}
Coefficient::Coefficient(const ExponentScalar& e) {
    for (auto& c : e.coords()) t_.push_back({CoeffKey{c.basis, {}, 0, 0}, c.value});
}
Coefficient Coefficient::param(ParamId p) {
    Coefficient c;
    c.t_.push_back({CoeffKey{{}, {{p, 1u}}, 0, 0}, 1});
    return c;
}
Coefficient Coefficient::param(const std::string& name) { return param(ParamTable::instance().declare(name)); }
Coefficient Coefficient::s_var() {
    Coefficient c;
    c.t_.push_back({CoeffKey{{}, {}, 1, 0}, 1});
    return c;
}
Coefficient Coefficient::exp_s(const Rational& q) {
    Coefficient c;
    c.t_.push_back({CoeffKey{{}, {}, 0, q}, 1});
    return c;
}
Coefficient Coefficient::constant(const Rational& r, const ConstantProduct& p) {
    return from_terms({CoeffTerm{CoeffKey{p, {}, 0, 0}, r}});
}

Coefficient Coefficient::from_terms(std::vector<CoeffTerm> ts) {
    std::vector<CoeffTerm> norm;
    norm.reserve(ts.size());
    for (auto& t : ts) {
        if (t.r == 0) continue;
        if (!needs_normalize(t.key.cp)) {
            norm.push_back(std::move(t));
            continue;
        }
        for (auto& [r, p] : normalize(t.r, t.key.cp)) {
            CoeffKey k = t.key;
            k.cp = std::move(p);
            norm.push_back({std::move(k), r});
        }
    }
    std::sort(norm.begin(), norm.end(), [](auto& a, auto& b) { return compare_key(a.key, b.key) < 0; });
    Coefficient out;
    for (auto& t : norm) {
        if (!out.t_.empty() && compare_key(out.t_.back().key, t.key) == 0)
            out.t_.back().r += t.r;
        else
            out.t_.push_back(std::move(t));
        if (out.t_.back().r == 0) out.t_.pop_back();
    }
    return out;
}

bool Coefficient::has_kappa() const {
    for (auto& t : t_)
        for (auto& f : t.key.cp.factors)
            if (SymbolTable::instance().get(f.sym).kind == SymbolKind::Kappa) return true;
    return false;
}

bool Coefficient::is_zero() const {
    if (t_.empty()) return true;
    if (!has_kappa()) return false;
    // a nonzero enclosure at a sample point settles it cheaply
    Bindings at;
    auto& pt = ParamTable::instance();
    for (auto& t : t_)
        for (auto& [p, n] : t.key.params) at[pt.name(p)] = Rational(2 * static_cast<long>(p) + 3, 7);
    at["s"] = Rational(3, 11);
    if (!eval_numeric(*this, at, 96).contains_zero()) return false;
    // clear kappa denominators: kappa_q (e^q - 1) = 1
    auto& tab = SymbolTable::instance();
    std::map<SymbolId, long> deg;
    for (auto& t : t_)
        for (auto& f : t.key.cp.factors)
            if (tab.get(f.sym).kind == SymbolKind::Kappa) {
                long n = f.exp.as_rational().get_num().get_si();
                deg[f.sym] = std::max(deg[f.sym], n);
            }
    std::vector<CoeffTerm> acc;
    for (auto& t : t_) {
        Coefficient term;
        CoeffKey k = t.key;
        std::map<SymbolId, long> have;
        ConstantProduct rest;
        for (auto& f : k.cp.factors) {
            if (tab.get(f.sym).kind == SymbolKind::Kappa)
                have[f.sym] = f.exp.as_rational().get_num().get_si();
            else
                rest.factors.push_back(f);
        }
        k.cp = rest;
        term.t_.push_back({k, t.r});
        for (auto& [s, d] : deg) {
            long m = d - have[s];
            Rational q = tab.get(s).param;
            Coefficient f = Coefficient::constant(1, exp_rational(q).second) - Coefficient(1);
            for (long i = 0; i < m; ++i) term = term * f;
        }
        for (auto& ct : term.t_) acc.push_back(ct);
    }
    return Coefficient::from_terms(std::move(acc)).t_.empty();
}

bool Coefficient::is_rational() const { return t_.empty() || (t_.size() == 1 && compare_key(t_[0].key, CoeffKey{}) == 0); }
Rational Coefficient::as_rational() const { return t_.empty() ? Rational(0) : t_[0].r; }

bool Coefficient::is_constant() const {
    for (auto& t : t_)
        if (!t.key.params.empty() || t.key.sdeg || t.key.srate != 0) return false;
    return true;
}
bool Coefficient::has_s() const {
    for (auto& t : t_)
        if (t.key.sdeg || t.key.srate != 0) return true;
    return false;
}
bool Coefficient::has_params() const {
    for (auto& t : t_)
        if (!t.key.params.empty()) return true;
    return false;
}

ExponentScalar Coefficient::to_scalar() const {
    if (!is_constant()) fail(ErrorKind::ConstantNotRepresentable, "coefficient is not a constant");
    std::vector<std::pair<Rational, ConstantProduct>> ts;
    for (auto& t : t_) ts.push_back({t.r, t.key.cp});
    return ExponentScalar::from_terms(std::move(ts));
}

Coefficient Coefficient::operator+(const Coefficient& o) const {
    if (o.t_.empty()) return *this;
    if (t_.empty()) return o;
    Coefficient r;
    r.t_.reserve(t_.size() + o.t_.size());
    std::size_t i = 0, j = 0;
    while (i < t_.size() || j < o.t_.size()) {
        int c = i == t_.size() ? 1 : j == o.t_.size() ? -1 : compare_key(t_[i].key, o.t_[j].key);
        if (c < 0)
            r.t_.push_back(t_[i++]);
        else if (c > 0)
            r.t_.push_back(o.t_[j++]);
        else {
            Rational v = t_[i].r + o.t_[j].r;
            if (v != 0) r.t_.push_back({t_[i].key, v});
            ++i, ++j;
        }
    }
    return r;
}
Coefficient Coefficient::operator-() const {
    Coefficient r = *this;
    for (auto& t : r.t_) t.r = -t.r;
    return r;
}
Coefficient Coefficient::operator-(const Coefficient& o) const { return *this + (-o); }

Coefficient Coefficient::operator*(const Coefficient& o) const {
    if (t_.empty() || o.t_.empty()) return {};
    if (o.is_rational()) {
        Coefficient r = *this;
        for (auto& t : r.t_) t.r *= o.t_[0].r;
        return r;
    }
    if (is_rational()) return o * *this;
    std::vector<CoeffTerm> ts;
    ts.reserve(t_.size() * o.t_.size());
    for (auto& a : t_)
        for (auto& b : o.t_) {
            CoeffKey k;
            k.params = merge_params(a.key.params, b.key.params);
            k.sdeg = a.key.sdeg + b.key.sdeg;
            k.srate = a.key.srate + b.key.srate;
            Rational r = a.r * b.r;
            for (auto& [q, p] : product(a.key.cp, b.key.cp)) {
                CoeffKey kk = k;
                kk.cp = std::move(p);
                ts.push_back({std::move(kk), r * q});
            }
        }
    return from_terms(std::move(ts));
}

Coefficient Coefficient::d_ds() const {
    std::vector<CoeffTerm> ts;
    for (auto& t : t_) {
        if (t.key.sdeg) {
            CoeffKey k = t.key;
            k.sdeg -= 1;
            ts.push_back({k, t.r * t.key.sdeg});
        }
        if (t.key.srate != 0) ts.push_back({t.key, t.r * t.key.srate});
    }
    return from_terms(std::move(ts));
}

Coefficient Coefficient::integrate_s() const {
    std::vector<CoeffTerm> ts;
    for (auto& t : t_) {
        unsigned n = t.key.sdeg;
        const Rational& q = t.key.srate;
        if (q == 0) {
            CoeffKey k = t.key;
            k.sdeg = n + 1;
            ts.push_back({k, t.r / (n + 1)});
            continue;
        }
        // int_0^s u^n e^{qu} du
        Rational fall = 1, qp = q;
        for (unsigned k = 0; k <= n; ++k) {
            CoeffKey kk = t.key;
            kk.sdeg = n - k;
            ts.push_back({kk, t.r * fall / qp * ((k % 2) ? -1 : 1)});
            fall *= (n - k);
            qp *= q;
        }
        Rational nf = 1;
        for (unsigned k = 2; k <= n; ++k) nf *= k;
        Rational qn = 1;
        for (unsigned k = 0; k <= n; ++k) qn *= q;
        CoeffKey kk = t.key;
        kk.sdeg = 0;
        kk.srate = 0;
        ts.push_back({kk, -t.r * nf / qn * ((n % 2) ? -1 : 1)});
    }
    return from_terms(std::move(ts));
}

Coefficient Coefficient::integrate_s01() const { return integrate_s().at_s(ExponentScalar(1)); }

Coefficient Coefficient::at_s(const ExponentScalar& s0) const {
    std::vector<ExponentScalar> pw{ExponentScalar(1)};
    Coefficient out;
    std::vector<CoeffTerm> ts;
    for (auto& t : t_) {
        if (!t.key.sdeg && t.key.srate == 0) {
            ts.push_back(t);
            continue;
        }
        while (pw.size() <= t.key.sdeg) pw.push_back(pw.back() * s0);
        CoeffKey k = t.key;
        k.sdeg = 0;
        k.srate = 0;
        Coefficient base;
        base.t_.push_back({k, t.r});
        Coefficient f(pw[t.key.sdeg]);
        if (t.key.srate != 0) {
            ExponentScalar ex = s0 * ExponentScalar(t.key.srate);
            f = f * Coefficient::constant(1, single(SymbolTable::instance().euler(), ex));
        }
        for (auto& ct : (base * f).t_) ts.push_back(ct);
    }
    return from_terms(std::move(ts));
}

Coefficient Coefficient::substitute(const Bindings& b) const {
    std::vector<CoeffTerm> ts;
    auto& pt = ParamTable::instance();
    for (auto& t : t_) {
        CoeffKey k = t.key;
        Rational r = t.r;
        ParamPowers keep;
        for (auto& [p, n] : k.params) {
            auto it = b.find(pt.name(p));
            if (it == b.end()) {
                keep.push_back({p, n});
                continue;
            }
            for (unsigned i = 0; i < n; ++i) r *= it->second;
        }
        k.params = keep;
        ts.push_back({k, r});
    }
    Coefficient c = from_terms(std::move(ts));
    auto sit = b.find("s");
    if (sit != b.end()) c = c.at_s(ExponentScalar(sit->second));
    return c;
}

std::size_t Coefficient::hash() const {
    std::size_t h = 0x77;
    for (auto& t : t_) {
        h = h * 131 ^ t.key.cp.hash();
        h = h * 131 ^ (t.key.sdeg + 97 * hash_rational(t.key.srate));
        for (auto& [p, n] : t.key.params) h = h * 131 ^ (p * 31 + n);
        h = h * 131 ^ hash_rational(t.r);
    }
    return h;
}

namespace {
Coefficient invert_simple(const Coefficient& c) {
    auto& ts = c.terms();
    if (ts.size() == 1) {
        auto& t = ts[0];
        if (!t.key.params.empty() || t.key.sdeg)
            fail(ErrorKind::NonInvertibleCoefficient, "coefficient has no inverse in the ring");
        CoeffKey k;
        k.cp = power(t.key.cp, ExponentScalar(-1));
        k.srate = -t.key.srate;
        return Coefficient::from_terms({CoeffTerm{k, 1 / t.r}});
    }
    if (ts.size() == 2 && c.is_constant()) {
        // r X (1 - e^d)
        auto ratio = product(ts[1].key.cp, power(ts[0].key.cp, -1));
        if (ts[0].r == -ts[1].r && ratio.size() == 1 && ratio[0].first == 1) {
            auto& cp = ratio[0].second;
            if (cp.factors.size() == 1 && cp.factors[0].sym == SymbolTable::instance().euler() &&
                cp.factors[0].exp.is_rational()) {
                Rational d = cp.factors[0].exp.as_rational();
                Coefficient head = invert_simple(Coefficient::from_terms({ts[0]}));
                auto& tab = SymbolTable::instance();
                if (d < 0)
                    return head * (Coefficient(1) + Coefficient::constant(1, single(tab.kappa(-d), 1)));
                return head * -Coefficient::constant(1, single(tab.kappa(d), 1));
            }
        }
    }
    fail(ErrorKind::NonInvertibleCoefficient, "coefficient has no inverse in the ring");
}
}  // namespace

Coefficient invert_coefficient(const Coefficient& c) {
    if (c.is_zero()) fail(ErrorKind::ZeroSeries, "inverse of zero coefficient");
    if (!c.has_kappa()) return invert_simple(c);
    if (c.terms().size() == 1) return invert_simple(c);
    auto& tab = SymbolTable::instance();
    std::map<SymbolId, long> deg;
    for (auto& t : c.terms())
        for (auto& f : t.key.cp.factors)
            if (tab.get(f.sym).kind == SymbolKind::Kappa)
                deg[f.sym] = std::max(deg[f.sym], f.exp.as_rational().get_num().get_si());
    Coefficient e = 1;
    for (auto& [s, d] : deg) {
        Coefficient f = Coefficient::constant(1, exp_rational(tab.get(s).param).second) - Coefficient(1);
        for (long i = 0; i < d; ++i) e = e * f;
    }
    Coefficient cleared = c * e;
    // cleared still carries kappa through normalization; multiply back out
    return e * invert_simple(cleared);
}

Coefficient pow_coefficient(const Coefficient& c, const ExponentScalar& a) {
    if (a.is_rational() && a.as_rational().get_den() == 1) {
        long n = a.as_rational().get_num().get_si();
        Coefficient base = n < 0 ? invert_coefficient(c) : c;
        Coefficient r = 1;
        for (long i = 0; i < std::labs(n); ++i) r = r * base;
        return r;
    }
    if (!c.is_constant()) fail(ErrorKind::NonConstantLeadingCoefficient, "power of a non-constant coefficient");
    if (c.terms().size() != 1) fail(ErrorKind::ConstantNotRepresentable, "power of a constant sum");
    auto& t = c.terms()[0];
    if (t.r < 0) fail(ErrorKind::NegativeBase, "power of a negative constant");
    std::vector<CoeffTerm> ts;
    for (auto& [r, p] : rational_power(t.r, a))
        for (auto& [q, pp] : product(p, power(t.key.cp, a))) ts.push_back({CoeffKey{pp, {}, 0, 0}, r * q});
    return Coefficient::from_terms(std::move(ts));
}

ExponentScalar log_coefficient(const Coefficient& c) {
    if (!c.is_constant()) fail(ErrorKind::NonConstantLeadingCoefficient, "log of a non-constant coefficient");
    if (c.terms().size() != 1) fail(ErrorKind::ConstantNotRepresentable, "log of a constant sum");
    auto& t = c.terms()[0];
    if (t.r <= 0) fail(ErrorKind::NegativeBase, "log of a non-positive constant");
    ExponentScalar r = log_rational(t.r);
    auto& tab = SymbolTable::instance();
    for (auto& f : t.key.cp.factors) {
        ConstantSymbol s = tab.get(f.sym);
        if (s.kind == SymbolKind::Euler)
            r = r + f.exp;
        else if (s.kind == SymbolKind::Prime)
            r = r + f.exp * ExponentScalar::from_terms({{Rational(1), single(tab.log_prime(s.param.get_num()), 1)}});
        else
            fail(ErrorKind::LogConstantNotDeclared, "no log symbol for " + s.name);
    }
    return r;
}

Interval eval_numeric(const Coefficient& c, const Bindings& b, mpfr_prec_t prec) {
    Interval r = Interval::of(0, prec);
    auto& pt = ParamTable::instance();
    for (auto& t : c.terms()) {
        Interval v = Interval::of(t.r, prec) * enclose(t.key.cp, prec);
        for (auto& [p, n] : t.key.params) {
            auto it = b.find(pt.name(p));
            if (it == b.end()) fail(ErrorKind::UnboundParameter, pt.name(p) + " unbound");
            v = v * Interval::of(it->second, prec).powi(n);
        }
        if (t.key.sdeg || t.key.srate != 0) {
            auto it = b.find("s");
            if (it == b.end()) fail(ErrorKind::UnboundParameter, "s unbound");
            Interval s = Interval::of(it->second, prec);
            v = v * s.powi(t.key.sdeg) * (Interval::of(t.key.srate, prec) * s).exp();
        }
        r = r + v;
    }
    return r;
}

int sign_of(const Coefficient& c) {
    if (c.has_params() || c.has_s()) fail(ErrorKind::SignUndecidable, "sign of a parameterized coefficient");
    if (c.is_rational()) return sgn(c.as_rational());
    if (c.is_zero()) return 0;
    for (mpfr_prec_t p = 64;; p *= 2) {
        if (p > compare_precision()) p = compare_precision();
        int s = eval_numeric(c, {}, p).sign();
        if (s) return s;
        if (p >= compare_precision()) break;
    }
    fail(ErrorKind::OrderUndecidable, "cannot separate constant from zero");
}

}  // namespace tseries
