#pragma once

#include <cstdint>

namespace chartduel::stats {

/// Pr[X >= g] for X ~ Binomial(n, 1/2), i.e. sum_{i=g..n} C(n,i) / 2^n.
/// Binomial coefficients are summed exactly as big integers; only the final
/// division rounds to double. Throws std::invalid_argument unless n >= 1 and
/// 0 <= g <= n.
double binomial_tail(std::int64_t n, std::int64_t g);

/// Pr[X <= g] under the same fair-coin null, computed from the lower sum.
double binomial_cdf(std::int64_t n, std::int64_t g);

}  // namespace chartduel::stats
