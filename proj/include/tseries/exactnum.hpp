#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tseries/errors.hpp"

namespace tseries {

using Rational = mpq_class;
using SymbolId = std::uint32_t;
using ParamId = std::uint32_t;

Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);
std::size_t hash_rational(const Rational& q);

// RAII wrapper over mpfr_t.
class Real {
public:
    explicit Real(mpfr_prec_t prec = 256);
    Real(const Real& o);
    Real(Real&& o) noexcept;
    Real& operator=(const Real& o);
    Real& operator=(Real&& o) noexcept;
    ~Real();

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

private:
    mpfr_t v_;
    bool live_ = false;
};

// Closed interval [lo, hi] with outward rounding.
class Interval {
public:
    explicit Interval(mpfr_prec_t prec = 256);
    static Interval of(const Rational& q, mpfr_prec_t prec);
    static Interval hull(const Real& a, const Real& b);

    const Real& lo() const { return lo_; }
    const Real& hi() const { return hi_; }
    Real& lo() { return lo_; }
    Real& hi() { return hi_; }
    mpfr_prec_t prec() const { return lo_.prec(); }

    bool contains_zero() const;
    bool positive() const;
    bool negative() const;
    // +1, -1 or 0 when the sign cannot be told
    int sign() const;
    double mid() const;
    double width() const;
    bool contains(double v) const;

    Interval operator+(const Interval& o) const;
    Interval operator-(const Interval& o) const;
    Interval operator*(const Interval& o) const;
    Interval operator/(const Interval& o) const;
    Interval operator-() const;

    Interval exp() const;
    Interval log() const;
    Interval pow(const Interval& e) const;
    Interval powi(long n) const;

private:
    Real lo_, hi_;
};

enum class SymbolKind { Euler, Prime, LogPrime, Kappa };

struct ConstantSymbol {
    SymbolKind kind;
    Rational param;  // prime p, or the rate q of kappa_q = 1/(e^q - 1)
    std::string name;
};

class SymbolTable {
public:
    static SymbolTable& instance();
    SymbolId euler();
    SymbolId prime(const mpz_class& p);
    SymbolId log_prime(const mpz_class& p);
    SymbolId kappa(const Rational& q);
    ConstantSymbol get(SymbolId id) const;
    Interval enclosure(SymbolId id, mpfr_prec_t prec) const;
    std::vector<SymbolId> kappas() const;

private:
    SymbolTable();
    SymbolId intern(SymbolKind k, const Rational& p, std::string name);
};

class ExponentScalar;

struct Factor;

// Product of symbol powers, sorted by symbol id.
struct ConstantProduct {
    std::vector<Factor> factors;

    bool empty() const { return factors.empty(); }
    bool operator==(const ConstantProduct& o) const;
    bool operator!=(const ConstantProduct& o) const { return !(*this == o); }
    std::size_t hash() const;
};

int compare_structural(const ConstantProduct& a, const ConstantProduct& b);

struct Coord;

// Q-linear combination of constant products; the empty product is 1.
class ExponentScalar {
public:
    ExponentScalar();
    ExponentScalar(const Rational& q);
    ExponentScalar(long q);
    static ExponentScalar from_terms(std::vector<std::pair<Rational, ConstantProduct>> ts);

    const std::vector<Coord>& coords() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    bool is_rational() const;
    Rational rational_part() const;
    // only valid when is_rational()
    Rational as_rational() const;

    ExponentScalar operator+(const ExponentScalar& o) const;
    ExponentScalar operator-(const ExponentScalar& o) const;
    ExponentScalar operator*(const ExponentScalar& o) const;
    ExponentScalar operator-() const;
    ExponentScalar& operator+=(const ExponentScalar& o) { return *this = *this + o; }
    bool operator==(const ExponentScalar& o) const;
    bool operator!=(const ExponentScalar& o) const { return !(*this == o); }

    Interval enclose(mpfr_prec_t prec) const;
    std::size_t hash() const;

private:
    std::vector<Coord> c_;
};

struct Factor {
    SymbolId sym;
    ExponentScalar exp;
};

struct Coord {
    ConstantProduct basis;
    Rational value;
};

int compare_structural(const ExponentScalar& a, const ExponentScalar& b);
// sign of a - b, exact when structurally equal, otherwise via refinement
int cmp_scalar(const ExponentScalar& a, const ExponentScalar& b);
int sign_of(const ExponentScalar& a);

Interval enclose(const ConstantProduct& p, mpfr_prec_t prec);

// Multiply two constant products; primes fold integer exponents into the
// rational factor and kappa relations are applied.
std::vector<std::pair<Rational, ConstantProduct>> product(const ConstantProduct& a,
                                                          const ConstantProduct& b);
std::vector<std::pair<Rational, ConstantProduct>> normalize(Rational r,
                                                            const ConstantProduct& p);
ConstantProduct single(SymbolId s, const ExponentScalar& e);
ConstantProduct power(const ConstantProduct& p, const ExponentScalar& e);

// e^q as a (rational, product) pair
std::pair<Rational, ConstantProduct> exp_rational(const Rational& q);
// r^e for r > 0 rational
std::vector<std::pair<Rational, ConstantProduct>> rational_power(const Rational& r,
                                                                 const ExponentScalar& e);
// log r for r > 0, as sum of log-prime symbols
ExponentScalar log_rational(const Rational& r);

class ParamTable {
public:
    static ParamTable& instance();
    ParamId declare(const std::string& name);
    std::optional<ParamId> find(const std::string& name) const;
    std::string name(ParamId id) const;

private:
    ParamTable() = default;
};

using ParamPowers = std::vector<std::pair<ParamId, unsigned>>;
using Bindings = std::map<std::string, Rational>;

struct CoeffKey {
    ConstantProduct cp;
    ParamPowers params;
    unsigned sdeg = 0;
    Rational srate = 0;  // exp(srate * s)
};

struct CoeffTerm {
    CoeffKey key;
    Rational r;
};

int compare_key(const CoeffKey& a, const CoeffKey& b);

// Polynomial in parameters and s with exp(q s) factors, over constant products.
class Coefficient {
public:
    Coefficient() = default;
    Coefficient(const Rational& q);
    Coefficient(long q) : Coefficient(Rational(q)) {}
    Coefficient(const ExponentScalar& e);
    static Coefficient param(ParamId p);
    static Coefficient param(const std::string& name);
    static Coefficient s_var();
    static Coefficient exp_s(const Rational& q);
    static Coefficient constant(const Rational& r, const ConstantProduct& p);
    static Coefficient from_terms(std::vector<CoeffTerm> ts);

    const std::vector<CoeffTerm>& terms() const { return t_; }
    bool structurally_zero() const { return t_.empty(); }
    bool is_zero() const;
    bool is_rational() const;
    Rational as_rational() const;
    bool is_constant() const;  // no parameters, no s
    bool has_s() const;
    bool has_params() const;
    bool has_kappa() const;
    ExponentScalar to_scalar() const;

    Coefficient operator+(const Coefficient& o) const;
    Coefficient operator-(const Coefficient& o) const;
    Coefficient operator*(const Coefficient& o) const;
    Coefficient operator-() const;
    Coefficient& operator+=(const Coefficient& o) { return *this = *this + o; }
    Coefficient& operator-=(const Coefficient& o) { return *this = *this - o; }
    Coefficient& operator*=(const Coefficient& o) { return *this = *this * o; }
    bool operator==(const Coefficient& o) const { return (*this - o).is_zero(); }
    bool operator!=(const Coefficient& o) const { return !(*this == o); }

    Coefficient d_ds() const;
    // integral from 0 to s
    Coefficient integrate_s() const;
    // integral from 0 to 1
    Coefficient integrate_s01() const;
    Coefficient at_s(const ExponentScalar& s0) const;
    Coefficient substitute(const Bindings& b) const;

    std::size_t hash() const;

private:
    std::vector<CoeffTerm> t_;
};

inline Coefficient operator+(long a, const Coefficient& b) { return Coefficient(a) + b; }
inline Coefficient operator-(long a, const Coefficient& b) { return Coefficient(a) - b; }
inline Coefficient operator*(long a, const Coefficient& b) { return Coefficient(a) * b; }

Coefficient invert_coefficient(const Coefficient& c);
Coefficient pow_coefficient(const Coefficient& c, const ExponentScalar& a);
ExponentScalar log_coefficient(const Coefficient& c);

// sign of a constant coefficient; throws for parameters
int sign_of(const Coefficient& c);
Interval eval_numeric(const Coefficient& c, const Bindings& b, mpfr_prec_t prec);

mpfr_prec_t compare_precision();
void set_compare_precision(mpfr_prec_t bits);

}  // namespace tseries
