#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace xplain {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Whole-string parse; throws InputError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what = "number");
long parse_long(std::string_view text, std::string_view what = "integer");

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace xplain
