#pragma once
// Operator entry point: ingest, serve, simulate, report, validate-log.
//
// Exit status 0 on success, 1 when a validation or runtime check fails, 2 on
// a usage error. Failures also print one JSON object to `err`.
#include <iosfwd>
#include <string>
#include <vector>

namespace chartduel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args[0]` is the program name, as in argv.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chartduel::cli
