#include "chartduel/synthetic.hpp"

#include <numeric>
#include <stdexcept>

namespace chartduel::synthetic {

std::vector<double> ar1_returns(std::size_t n, double phi, double sigma, SplitMix64& rng) {
  constexpr std::size_t kBurnIn = 200;
  std::vector<double> out;
  out.reserve(n);
  double x = 0.0;
  for (std::size_t i = 0; i < n + kBurnIn; ++i) {
    x = phi * x + sigma * standard_normal(rng);
    if (i >= kBurnIn) out.push_back(x);
  }
  return out;
}

std::vector<double> iid_returns(std::size_t n, double sigma, SplitMix64& rng) {
  std::vector<double> out(n);
  for (auto& v : out) v = sigma * standard_normal(rng);
  return out;
}

void shuffle_within_chunks(std::vector<double>& returns, std::size_t chunk, SplitMix64& rng) {
  if (chunk == 0) throw std::invalid_argument("chunk must be positive");
  for (std::size_t start = 0; start + chunk <= returns.size(); start += chunk) {
    const auto perm = series::sample_permutation(chunk, rng);
    std::vector<double> block(chunk);
    for (std::size_t k = 0; k < chunk; ++k) block[k] = returns[start + perm.mapping[k]];
    std::copy(block.begin(), block.end(), returns.begin() + static_cast<std::ptrdiff_t>(start));
  }
}

series::ReturnSequence as_sequence(std::vector<double> returns, double base_price) {
  series::ReturnSequence s;
  s.returns = std::move(returns);
  s.base_price = base_price;
  return s;
}

series::ReturnSequence generate(const std::string& spec, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto field = [&](std::size_t i) {
    std::size_t pos = 0;
    for (std::size_t k = 0; k < i; ++k) {
      pos = spec.find(':', pos);
      if (pos == std::string::npos) throw std::invalid_argument("bad synthetic spec '" + spec + "'");
      ++pos;
    }
    return spec.substr(pos, spec.find(':', pos) - pos);
  };
  const auto kind = field(0);
  if (kind == "iid") return as_sequence(iid_returns(n, 1.0, rng));
  if (kind == "ar1") return as_sequence(ar1_returns(n, std::stod(field(1)), 1.0, rng));
  if (kind == "ar1-shuffled") {
    auto r = ar1_returns(n, std::stod(field(1)), 1.0, rng);
    shuffle_within_chunks(r, std::stoul(field(2)), rng);
    return as_sequence(std::move(r));
  }
  throw std::invalid_argument("unknown synthetic kind '" + kind + "'");
}

}  // namespace chartduel::synthetic
