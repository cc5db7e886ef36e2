#pragma once

#include <span>
#include <string>

namespace chartduel::bots {

/// Chart statistics a learning bot can key on.
enum class Feature {
  kLag1Autocorrelation,     // trending vs mean-reverting returns
  kAbsLag1Autocorrelation,  // volatility clustering ("smooth" vs "spiky")
};

std::string to_string(Feature f);
Feature feature_from_string(const std::string& s);

/// Sample lag-1 autocorrelation, sum (x_t - m)(x_{t-1} - m) / sum (x_t - m)^2.
/// Returns 0 for fewer than 2 points or zero variance.
double lag1_autocorrelation(std::span<const double> x);
/// Same statistic on |x_t|.
double abs_lag1_autocorrelation(std::span<const double> x);

double evaluate(Feature f, std::span<const double> returns);

}  // namespace chartduel::bots
