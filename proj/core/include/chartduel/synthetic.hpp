#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chartduel/random.hpp"
#include "chartduel/series.hpp"

namespace chartduel::synthetic {

/// x_t = phi * x_{t-1} + sigma * e_t with standard normal e_t, after a burn-in.
std::vector<double> ar1_returns(std::size_t n, double phi, double sigma, SplitMix64& rng);
/// Exchangeable (i.i.d. normal) returns.
std::vector<double> iid_returns(std::size_t n, double sigma, SplitMix64& rng);
/// Uniformly shuffles each consecutive block of `chunk` values in place, so a
/// chunk-aligned segment becomes a random permutation of itself.
void shuffle_within_chunks(std::vector<double>& returns, std::size_t chunk, SplitMix64& rng);

series::ReturnSequence as_sequence(std::vector<double> returns, double base_price = 100.0);

/// "ar1:<phi>", "iid", or "ar1-shuffled:<phi>:<chunk>"; `n` returns.
series::ReturnSequence generate(const std::string& spec, std::size_t n, std::uint64_t seed);

}  // namespace chartduel::synthetic
