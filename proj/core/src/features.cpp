#include "chartduel/features.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace chartduel::bots {

std::string to_string(Feature f) {
  return f == Feature::kLag1Autocorrelation ? "lag1" : "abs-lag1";
}

Feature feature_from_string(const std::string& s) {
  if (s == "lag1") return Feature::kLag1Autocorrelation;
  if (s == "abs-lag1") return Feature::kAbsLag1Autocorrelation;
  throw std::invalid_argument("unknown feature '" + s + "' (expected lag1 or abs-lag1)");
}

double lag1_autocorrelation(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double d = x[t] - mean;
    den += d * d;
    if (t > 0) num += d * (x[t - 1] - mean);
  }
  if (den <= 0.0) return 0.0;
  return num / den;
}

double abs_lag1_autocorrelation(std::span<const double> x) {
  std::vector<double> a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = std::abs(x[i]);
  return lag1_autocorrelation(a);
}

double evaluate(Feature f, std::span<const double> returns) {
  return f == Feature::kLag1Autocorrelation ? lag1_autocorrelation(returns)
                                            : abs_lag1_autocorrelation(returns);
}

}  // namespace chartduel::bots
