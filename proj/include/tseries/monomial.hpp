#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "tseries/exactnum.hpp"

namespace tseries {

class Transseries;

// 0 means "no exponential part"
using GenId = std::uint32_t;

// Prod_d (log^[d] x)^{lp[d]} * e^{-L[ex]}
struct Monomial {
    std::vector<ExponentScalar> lp;
    GenId ex = 0;

    static Monomial one() { return {}; }
    static Monomial x_pow(const ExponentScalar& a);
    static Monomial log_atom(std::size_t d, const ExponentScalar& a = ExponentScalar(1));
    static Monomial gen(GenId id);

    bool is_one() const { return lp.empty() && ex == 0; }
    ExponentScalar exponent(std::size_t d) const { return d < lp.size() ? lp[d] : ExponentScalar(); }
    // number of log-depth slots used (x alone has depth 1)
    std::size_t depth() const { return lp.size(); }
    bool is_log_atom(std::size_t* d) const;

    bool operator==(const Monomial& o) const { return ex == o.ex && lp == o.lp; }
    bool operator!=(const Monomial& o) const { return !(*this == o); }
    std::size_t hash() const;
};

struct MonomialHash {
    std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

Monomial operator*(const Monomial& a, const Monomial& b);
Monomial inverse(const Monomial& m);
Monomial operator/(const Monomial& a, const Monomial& b);
Monomial power(const Monomial& m, const ExponentScalar& a);
std::pair<Monomial, Coefficient> mul_monomial(const Monomial& a, const Monomial& b);

// -1: a is asymptotically smaller, 0: equal, +1: larger
int cmp(const Monomial& a, const Monomial& b);
inline bool is_small(const Monomial& m) { return cmp(m, Monomial::one()) < 0; }
inline bool is_large(const Monomial& m) { return cmp(m, Monomial::one()) > 0; }
inline const Monomial& max_of(const Monomial& a, const Monomial& b) { return cmp(a, b) >= 0 ? a : b; }

Transseries logderiv_monomial(const Monomial& m);
// e^{-L}: splits constants and log atoms off L, interns the rest
std::pair<Monomial, Coefficient> intern_exponential(const Transseries& L);
// e^{k} for a constant k
Coefficient exp_constant(const Coefficient& k);

class Registry {
public:
    static Registry& instance();
    GenId intern(const Transseries& L);
    const Transseries& get(GenId id) const;
    std::size_t size() const;

private:
    Registry();
};

std::size_t depth_cap();
void set_depth_cap(std::size_t d);
void check_depth(const Monomial& m);

}  // namespace tseries
