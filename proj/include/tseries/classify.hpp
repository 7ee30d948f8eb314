#pragma once

#include "tseries/compose.hpp"

namespace tseries {

enum class Kind { Shallow, Moderate, Deep };
const char* kind_name(Kind k);

struct Witness {
    Monomial g;
    Coefficient b;  // g^dagger ~ b/(x e) in the moderate case
};

struct Classification {
    Kind kind = Kind::Shallow;
    bool purely_deep = false;
    Coefficient a;
    Monomial e;
    std::vector<Witness> witnesses;
};

// U with T = x(1 + U)
Transseries near_identity_part(const Transseries& T);
std::pair<Coefficient, Monomial> first_ratio(const Transseries& T);
// -1, 0, +1 for g^dagger against 1/(x e)
int compare_to_threshold(const Monomial& g, const Monomial& e);
// b with g^dagger ~ b/(x e)
Coefficient moderate_constant(const Monomial& g, const Monomial& e);
Classification classify(const Transseries& T);

int exponentiality(const Transseries& T, std::size_t budget = 6);

struct ExtendedClass {
    std::size_t k = 0;
    Classification c;
    Transseries conj;
};
// conjugates up until the series is ~ x, then classifies; the current
// truncation applies to the final conjugate
ExtendedClass classify_extended(const Transseries& T, std::size_t budget = 6);

// conj_up applied until the series is ~ x; trunc applies to the result and
// mags receives the magnitudes of the intermediate conjugates
Transseries conjugate_to_x(const Transseries& T, const Bound& trunc, std::vector<Monomial>* mags = nullptr,
                           std::size_t budget = 6);

// truncation for A such that conj_up(A) meets `outer`, given mag A
Bound pull_back_up(const Bound& outer, const Monomial& magA);

}  // namespace tseries
