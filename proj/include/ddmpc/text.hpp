#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ddmpc::text {

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

/// Parses a full token as a double; throws ConfigError naming `context` on failure.
double parse_double(std::string_view token, std::string_view context);
long long parse_int(std::string_view token, std::string_view context);

std::string_view trim(std::string_view s);

/// Splits on any of `delims`, dropping empty tokens.
std::vector<std::string> split(std::string_view s, std::string_view delims);

/// Whitespace/comma/semicolon separated list of doubles.
std::vector<double> parse_double_list(std::string_view s, std::string_view context);

}  // namespace ddmpc::text
