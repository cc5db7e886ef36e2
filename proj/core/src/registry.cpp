#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "chartduel/errors.hpp"
#include "chartduel/store.hpp"

namespace chartduel::store {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

series::ReturnSequence slice(const series::ReturnSequence& all, std::size_t begin,
                             std::size_t end) {
  series::ReturnSequence out;
  double base = all.base_price;
  for (std::size_t i = 0; i < begin; ++i) base += all.returns[i];
  out.base_price = base;
  out.origin_index = all.origin_index + begin;
  out.returns.assign(all.returns.begin() + static_cast<std::ptrdiff_t>(begin),
                     all.returns.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace

IndexRange practice_slice_for(std::size_t return_count, double fraction) {
  const auto reserved = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(return_count)));
  return {return_count - reserved, return_count};
}

SplitReturns split_returns(const DatasetRecord& record) {
  const auto all = series::compute_returns(record.prices);
  const auto& ps = record.practice_slice;
  SplitReturns out;
  if (ps.empty()) {
    out.scoring = all;
    return out;
  }
  if (ps.end != all.size() || ps.begin > all.size()) {
    throw std::invalid_argument("practice slice must be a suffix of the returns");
  }
  out.scoring = slice(all, 0, ps.begin);
  out.practice = slice(all, ps.begin, ps.end);
  return out;
}

const DatasetRecord& DatasetRegistry::register_dataset(DatasetRecord record) {
  if (record.codename.empty()) throw std::invalid_argument("codename is empty");
  if (records_.count(record.codename)) {
    throw std::invalid_argument("codename '" + record.codename + "' is already registered");
  }
  if (lower(record.codename) == lower(record.source_description)) {
    throw std::invalid_argument("codename must not reveal the source description");
  }
  const std::size_t returns = record.prices.size() - 1;
  if (record.practice_slice.empty() && record.practice_slice.end == 0) {
    record.practice_slice = practice_slice_for(returns);
  }
  if (record.practice_slice.end > returns) {
    throw std::invalid_argument("practice slice exceeds the data");
  }
  const auto name = record.codename;
  return records_.emplace(name, std::move(record)).first->second;
}

const DatasetRecord& DatasetRegistry::get(const std::string& codename) const {
  auto it = records_.find(codename);
  if (it == records_.end()) throw std::out_of_range("unknown dataset '" + codename + "'");
  return it->second;
}

bool DatasetRegistry::contains(const std::string& codename) const {
  return records_.count(codename) != 0;
}

std::vector<PublicDatasetInfo> DatasetRegistry::listing() const {
  std::vector<PublicDatasetInfo> out;
  for (const auto& [name, r] : records_) {
    out.push_back({name, r.frequency, r.prices.size() - 1, r.practice_slice.size()});
  }
  return out;
}

void DatasetRegistry::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json index = nlohmann::ordered_json::array();
  for (const auto& [name, r] : records_) {
    const auto file = name + ".csv";
    {
      std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
      out << (r.frequency == Frequency::kDaily ? "date" : "timestamp") << ",price\n";
      char buf[64];
      std::size_t row = 0;
      for (double p : r.prices.prices()) {
        std::snprintf(buf, sizeof buf, "%.17g", p);
        out << row++ << ',' << buf << '\n';
      }
      if (!out) throw std::runtime_error("failed writing " + (dir / file).string());
    }
    nlohmann::ordered_json e;
    e["codename"] = name;
    e["source_description"] = r.source_description;
    e["frequency"] = engine::to_string(r.frequency);
    e["file"] = file;
    e["practice_begin"] = r.practice_slice.begin;
    e["practice_end"] = r.practice_slice.end;
    index.push_back(e);
  }
  const auto tmp = dir / "registry.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << index.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, dir / "registry.json");
}

DatasetRegistry DatasetRegistry::load(const std::filesystem::path& dir) {
  DatasetRegistry reg;
  const auto index_path = dir / "registry.json";
  if (!std::filesystem::exists(index_path)) return reg;
  std::ifstream in(index_path);
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(index_path.string() + ": " + e.what());
  }
  for (const auto& e : index) {
    const auto freq = engine::mode_from_string(e.at("frequency").get<std::string>());
    // Stored rows are renumbered 0..T, so the time column is always numeric.
    auto prices = load_prices(dir / e.at("file").get<std::string>(), freq);
    DatasetRecord r{e.at("codename").get<std::string>(),
                    e.value("source_description", std::string{}), freq, std::move(prices),
                    IndexRange{e.at("practice_begin").get<std::size_t>(),
                               e.at("practice_end").get<std::size_t>()}};
    reg.register_dataset(std::move(r));
  }
  return reg;
}

}  // namespace chartduel::store
