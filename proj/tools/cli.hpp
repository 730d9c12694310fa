#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace beb::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Run bebtool with argv-style arguments (args[0] is the program name).
/// Returns 0 on success, 2 when the input is degenerate for the requested
/// analysis, 1 on I/O, schema or usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace beb::cli
