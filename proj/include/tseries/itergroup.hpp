#pragma once

#include "tseries/classify.hpp"

namespace tseries {

// Phi(s, x) = x (1 + sum alpha_g(s) g), alpha in the variable s of Coefficient
struct IterationGroup {
    Coefficient a;
    Monomial e;
    std::vector<Monomial> support;  // descending
    std::vector<Coefficient> alpha;
    Classification cls;
    Bound trunc;  // on the monomials g of U
    bool identity = false;

    Coefficient alpha_of(const Monomial& g) const;
};

std::vector<Monomial> closure_support(const std::vector<Monomial>& suppU, const Bound& trunc);

struct Pair {
    Monomial g1, g2;
    Coefficient w;  // coefficient of g in (x g1)' g2
};
std::vector<Pair> pairs_for(const Monomial& g, const std::vector<Monomial>& B);

IterationGroup group_shallow(const Transseries& T, const Bound& trunc);
IterationGroup group_moderate(const Transseries& T, const Bound& trunc);
// dispatches on classify; deep series fail with DeepNoCommonSupport
IterationGroup build_group(const Transseries& T, const Bound& trunc);

// Phi(s0, x), truncated at x * trunc
Transseries evaluate_group(const IterationGroup& G, const ExponentScalar& s0);
// Phi(s, x) with s kept symbolic
Transseries group_series(const IterationGroup& G);

}  // namespace tseries
