#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pnr::textio {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Strict parse of a full token as a double; throws ConfigError with `what`
/// in the message on failure. Accepts "nan"/"inf".
double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delimiter);

}  // namespace pnr::textio
