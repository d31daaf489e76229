#include "lgdlab/format.hpp"

#include "lgdlab/error.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>

namespace lgdlab {

std::string format_number(double v) {
    if (v == 0.0) return "0";  // also folds -0
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end) {
        throw ParseError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

long long parse_integer(std::string_view text) {
    long long v = 0;
    const char* end = text.data() + text.size();
    auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end) {
        throw ParseError("not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace lgdlab
