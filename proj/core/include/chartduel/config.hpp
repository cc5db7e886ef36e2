#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chartduel/engine.hpp"

namespace chartduel::config {

/// Contest definitions from an INI file. Every section whose name starts
/// with "contest" defines one contest:
///
///   [contest.lynx]
///   id = lynx-2024
///   dataset = Lynx
///   mode = tick
///   points_per_chart = 80
///   points_per_screen = 40
///   charts_per_subject = 35
///   tick_interval_ms = 1000
///   seed = 42
///   ; optional: guess_deadline_ms, start_ms, end_ms, prize_note
///
/// Comments go on their own line; a ';' after a value is part of the value.
/// Throws ParseError on syntax or value errors.
std::vector<engine::ContestConfig> load_contests(const std::filesystem::path& path);
std::vector<engine::ContestConfig> parse_contests(const std::string& ini_text);

}  // namespace chartduel::config
