#include "chartduel/binomial.hpp"

#include <gmp.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace chartduel::stats {
namespace {

class Mpz {
 public:
  Mpz() { mpz_init(value_); }
  ~Mpz() { mpz_clear(value_); }
  Mpz(const Mpz&) = delete;
  Mpz& operator=(const Mpz&) = delete;
  mpz_ptr get() noexcept { return value_; }
  mpz_srcptr get() const noexcept { return value_; }

 private:
  mpz_t value_;
};

// sum / 2^n, correctly handling sums far outside double's exponent range
// before scaling.
double scaled(const Mpz& sum, std::int64_t n) {
  if (mpz_sgn(sum.get()) == 0) return 0.0;
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, sum.get());
  return std::ldexp(mantissa, static_cast<int>(exponent - n));
}

// sum_{i=lo..hi} C(n, i), walking C(n, i+1) = C(n, i) * (n - i) / (i + 1).
void binomial_sum(std::int64_t n, std::int64_t lo, std::int64_t hi, Mpz& sum) {
  Mpz term;
  mpz_bin_uiui(term.get(), static_cast<unsigned long>(n), static_cast<unsigned long>(lo));
  mpz_set_ui(sum.get(), 0);
  for (std::int64_t i = lo; i <= hi; ++i) {
    mpz_add(sum.get(), sum.get(), term.get());
    if (i == hi) break;
    mpz_mul_ui(term.get(), term.get(), static_cast<unsigned long>(n - i));
    mpz_divexact_ui(term.get(), term.get(), static_cast<unsigned long>(i + 1));
  }
}

void check_args(std::int64_t n, std::int64_t g) {
  if (n < 1) throw std::invalid_argument("trial count must be >= 1, got " + std::to_string(n));
  if (g < 0 || g > n) {
    throw std::invalid_argument("success count " + std::to_string(g) + " outside [0, " +
                                std::to_string(n) + "]");
  }
}

}  // namespace

double binomial_tail(std::int64_t n, std::int64_t g) {
  check_args(n, g);
  if (g == 0) return 1.0;
  Mpz sum;
  binomial_sum(n, g, n, sum);
  return scaled(sum, n);
}

double binomial_cdf(std::int64_t n, std::int64_t g) {
  check_args(n, g);
  if (g == n) return 1.0;
  Mpz sum;
  binomial_sum(n, 0, g, sum);
  return scaled(sum, n);
}

}  // namespace chartduel::stats
