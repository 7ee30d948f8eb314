#pragma once

#include "tseries/series.hpp"

namespace tseries {

Transseries derive(const Transseries& a);
Transseries logderiv(const Transseries& a);
Transseries integrate(const Transseries& a);
Transseries exp_series(const Transseries& a);
Transseries log_series(const Transseries& a);

std::size_t by_parts_limit();
void set_by_parts_limit(std::size_t n);

}  // namespace tseries
