#pragma once

#include "tseries/calculus.hpp"

namespace tseries {

// T o S for large positive S, truncated to the current truncation
Transseries compose(const Transseries& T, const Transseries& S);
// dominant monomial of m o S
Monomial compose_mag(const Monomial& m, const Transseries& S);
// factor rho in (0, 1] such that a clause "degree > D" on T survives T o S as
// "degree > rho D"; nullopt when the clause cannot be carried
std::optional<Rational> degree_factor(const Grading& g, const Transseries& S);
Transseries shift(const Transseries& T, const Coefficient& k);

// log o T o exp and exp o T o log
Transseries conj_up(const Transseries& T);
Transseries conj_down(const Transseries& T);
// x^{1/k} o T o x^k
Transseries conj_power(const Transseries& T, const Rational& k);

Transseries compose_inverse(const Transseries& T);

struct NumericValue {
    Interval value;
    // |bound monomial| at the point; heuristic only
    double bound_estimate = 0;
};
NumericValue eval_double(const Transseries& T, const Rational& x0, const Bindings& b, mpfr_prec_t prec = 128);
Interval eval_monomial(const Monomial& m, const Interval& x, const Bindings& b);

}  // namespace tseries
