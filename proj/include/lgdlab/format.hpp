#pragma once

#include <string>
#include <string_view>

namespace lgdlab {

// Shortest text that parses back to the same double.
std::string format_number(double v);
// Whole field must be a number; throws ParseError otherwise.
double parse_number(std::string_view text);
long long parse_integer(std::string_view text);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

}  // namespace lgdlab
