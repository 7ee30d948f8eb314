#pragma once

#include "tseries/itergroup.hpp"

namespace tseries {

std::size_t max_rounds();
void set_max_rounds(std::size_t n);

// V o T - V - tau
Transseries verify_abel(const Transseries& V, const Transseries& T, const Coefficient& tau);

// T = x + tau + A with tau a nonzero constant and every monomial of A deep (g^dagger > 1)
bool purely_deep_form(const Transseries& T, Coefficient* tau = nullptr, Transseries* A = nullptr);

// V = +-integral 1/Phi_1(0, x); V o T = V + direction
Transseries abel_moderate(const Transseries& T, const Bound& trunc, int* direction = nullptr);
// V = x + sum_k A o T^[k], for T = x + tau + A purely deep; V o T = V + tau
Transseries abel_purely_deep(const Transseries& T, const Bound& trunc);
// the summands A o T^[j], j < k, each to relative precision rel
std::vector<Transseries> abel_rounds(const Transseries& T, std::size_t k, const Monomial& rel);

struct Reduction {
    Transseries V;  // from the moderate part
    Transseries R;  // V o T o V^[-1] = x +- 1 + B, B purely deep
};
Reduction reduce_deep(const Transseries& T, const Bound& trunc);

struct AbelResult {
    std::size_t k = 0;           // conjugations up to reach ~ x
    std::vector<Monomial> mags;  // mag of the i-th conjugate, i < k
    Transseries conj;            // conj_up^k(T)
    Transseries V;               // V o conj = V + tau
    Coefficient tau;
    int direction = 1;
};
// trunc applies to V in the conjugated coordinate
AbelResult abel_general(const Transseries& T, const Bound& trunc);

// x + Y with Y = s + B - B o (x + Y), B = V - x deep: V^[-1] o (V + s)
Transseries shift_conjugate(const Transseries& V, const Coefficient& s);
// T^[s] truncated at trunc; levels[i] receives the iterate of the i-th conjugate
Transseries frac_iterate(const Transseries& T, const ExponentScalar& s, const Bound& trunc,
                         std::vector<Transseries>* levels = nullptr);

ExponentScalar find_exponent(const Transseries& A, const Transseries& B, const Bound& trunc);

// truncation for A such that conj_down(A) ~ m meets `outer`
Bound pull_back_down(const Bound& outer, const Monomial& m);
// mag of conj_down(T)
Monomial conj_down_mag(const Transseries& T);

}  // namespace tseries
