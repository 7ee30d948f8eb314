#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tseries/monomial.hpp"

namespace tseries {

// Linear "grid degree" on monomials: weight per log depth (applied to -a_d)
// plus weights for the monomials n occurring in exponents e^{-c n}.
struct Grading {
    std::vector<Rational> depth_w;
    std::vector<std::pair<Monomial, Rational>> gen_w;

    ExponentScalar degree(const Monomial& m) const;
    Rational weight_of(const Monomial& n) const;
};

struct DegreeClause {
    std::shared_ptr<const Grading> g;
    ExponentScalar max;  // terms of degree > max are negligible
};

// Set of negligible monomials: those <= cut, or of too high degree.
class Bound {
public:
    Bound() = default;
    static Bound at(const Monomial& cut);
    static Bound degree(std::shared_ptr<const Grading> g, const ExponentScalar& max);

    bool exact() const { return !cut_ && degs_.empty(); }
    bool negligible(const Monomial& m) const;
    const std::optional<Monomial>& cut() const { return cut_; }
    const std::vector<DegreeClause>& degrees() const { return degs_; }

    Bound scaled(const Monomial& m) const;
    // union of the negligible sets
    Bound operator|(const Bound& o) const;
    bool operator==(const Bound& o) const;

private:
    std::optional<Monomial> cut_;
    std::vector<DegreeClause> degs_;
};

struct Term {
    Monomial m;
    Coefficient c;
};

class Transseries {
public:
    Transseries() = default;
    Transseries(const Coefficient& c);
    Transseries(const Rational& q) : Transseries(Coefficient(q)) {}
    Transseries(long q) : Transseries(Coefficient(q)) {}
    static Transseries x();
    static Transseries term(const Coefficient& c, const Monomial& m);
    // terms in any order; like terms merged
    static Transseries from_terms(std::vector<Term> ts, Bound b = {});
    // already strictly descending, nonzero
    static Transseries from_sorted(std::vector<Term> ts, Bound b = {});

    const std::vector<Term>& terms() const { return t_; }
    const Bound& bound() const { return b_; }
    bool is_zero() const { return t_.empty(); }
    bool exact() const { return b_.exact(); }
    std::size_t size() const { return t_.size(); }

    const Term& dominant() const;
    const Monomial& mag() const { return dominant().m; }
    Coefficient coeff_of(const Monomial& m) const;

    Transseries with_bound(const Bound& b) const;
    Transseries truncated(const Bound& b) const;
    Transseries exact_part() const { return from_sorted(t_); }

    Transseries operator+(const Transseries& o) const;
    Transseries operator-(const Transseries& o) const;
    Transseries operator-() const;
    Transseries operator*(const Transseries& o) const;
    Transseries& operator+=(const Transseries& o) { return *this = *this + o; }
    Transseries& operator-=(const Transseries& o) { return *this = *this - o; }
    Transseries& operator*=(const Transseries& o) { return *this = *this * o; }
    Transseries scale(const Coefficient& c) const;
    Transseries scale(const Coefficient& c, const Monomial& m) const;

    // term-wise equality of exact parts and bounds
    bool same_as(const Transseries& o) const;
    std::size_t hash() const;

private:
    std::vector<Term> t_;
    Bound b_;
};

inline Transseries operator+(long a, const Transseries& b) { return Transseries(a) + b; }
inline Transseries operator-(long a, const Transseries& b) { return Transseries(a) - b; }
inline Transseries operator*(long a, const Transseries& b) { return Transseries(a) * b; }

struct Split {
    Transseries large;
    Coefficient constant;
    Transseries small;
};
Split split(const Transseries& a);

Transseries invert_unit(const Transseries& a);
Transseries pow_real(const Transseries& a, const ExponentScalar& e);
// sum_n a_n u^n for small u, truncated relative to 1
Transseries power_series(const Transseries& u, const std::function<Coefficient(unsigned)>& coef);

// bound of (negligible set) * s, and the finest bound b' with b' * s inside b
Bound scaled_by(const Bound& b, const Transseries& s);
Bound relative_to(const Bound& b, const Transseries& s);
ExponentScalar min_degree(const Grading& g, const Transseries& s);

int compare_asymptotic(const Transseries& a, const Transseries& b);
bool is_large_positive(const Transseries& a);
Transseries truncate_to(const Transseries& a, const Monomial& cut);
// difference above the common bound is zero
bool equal_to_bound(const Transseries& a, const Transseries& b);

// thread-local truncation applied by every operation
const Bound& current_trunc();
class TruncScope {
public:
    explicit TruncScope(Bound b);
    ~TruncScope();
    TruncScope(const TruncScope&) = delete;
    TruncScope& operator=(const TruncScope&) = delete;

private:
    Bound saved_;
};

std::size_t term_budget();
void set_term_budget(std::size_t n);

std::string to_string(const Coefficient& c);
std::string to_string(const ExponentScalar& e);
std::string to_string(const Monomial& m);
std::string to_string(const Transseries& t);
std::string to_string(const Bound& b);

}  // namespace tseries
