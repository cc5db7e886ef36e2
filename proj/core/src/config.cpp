#include "chartduel/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

#include "chartduel/errors.hpp"

namespace chartduel::config {

namespace pt = boost::property_tree;

namespace {

template <typename T>
T required(const pt::ptree& section, const std::string& section_name, const std::string& key) {
  auto v = section.get_optional<T>(pt::ptree::path_type(key, '/'));
  if (!v) throw ParseError("[" + section_name + "] missing or invalid '" + key + "'");
  return *v;
}

template <typename T>
T optional_value(const pt::ptree& section, const std::string& section_name, const std::string& key,
                 T fallback) {
  const auto raw = section.get_optional<std::string>(pt::ptree::path_type(key, '/'));
  if (!raw) return fallback;
  auto v = section.get_optional<T>(pt::ptree::path_type(key, '/'));
  if (!v) throw ParseError("[" + section_name + "] invalid value for '" + key + "'");
  return *v;
}

}  // namespace

std::vector<engine::ContestConfig> parse_contests(const std::string& ini_text) {
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  std::vector<engine::ContestConfig> out;
  for (const auto& [name, section] : tree) {
    if (name.rfind("contest", 0) != 0) continue;
    engine::ContestConfig c;
    const auto suffix = name.size() > 8 ? name.substr(8) : std::string{};
    c.contest_id = optional_value<std::string>(section, name, "id", suffix);
    c.dataset_codename = required<std::string>(section, name, "dataset");
    try {
      c.mode = engine::mode_from_string(optional_value<std::string>(section, name, "mode", "daily"));
    } catch (const std::invalid_argument& e) {
      throw ParseError("[" + name + "] " + e.what());
    }
    c.points_per_chart = optional_value<std::uint32_t>(section, name, "points_per_chart", 80);
    c.points_per_screen = optional_value<std::uint32_t>(section, name, "points_per_screen", 40);
    c.charts_per_subject = optional_value<std::uint32_t>(section, name, "charts_per_subject", 35);
    c.tick_interval = std::chrono::milliseconds(
        optional_value<std::int64_t>(section, name, "tick_interval_ms", 1000));
    if (section.get_optional<std::string>("guess_deadline_ms")) {
      c.guess_deadline = std::chrono::milliseconds(
          required<std::int64_t>(section, name, "guess_deadline_ms"));
    }
    c.start_ms = optional_value<std::int64_t>(section, name, "start_ms", c.start_ms);
    c.end_ms = optional_value<std::int64_t>(section, name, "end_ms", c.end_ms);
    c.prize_note = optional_value<std::string>(section, name, "prize_note", "");
    c.seed = optional_value<std::uint64_t>(section, name, "seed", 0);
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError("[" + name + "] " + e.what());
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw ParseError("no [contest...] section found");
  return out;
}

std::vector<engine::ContestConfig> load_contests(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_contests(buf.str());
}

}  // namespace chartduel::config
