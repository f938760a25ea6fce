#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "v2gq/errors.hpp"

namespace v2gq::text {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Drops everything from the first '#' and surrounding whitespace.
inline std::string_view strip_comment(std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    return trim(line);
}

inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double to_double(std::string_view s, const std::string& source, int line) {
    // gcc 11 has floating-point from_chars; strtod would honour the C locale.
    double value = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end || s.empty())
        throw ParseError(source, line, "invalid number '" + std::string(s) + "'");
    return value;
}

inline int to_int(std::string_view s, const std::string& source, int line) {
    int value = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end || s.empty())
        throw ParseError(source, line, "invalid integer '" + std::string(s) + "'");
    return value;
}

}  // namespace v2gq::text
