#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fntag::text {

// U+104B MYANMAR SIGN SECTION, the sentence-final mark.
inline constexpr std::string_view kSentenceMark = "\xE1\x81\x8B";

bool is_space(char c);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Returns npos when s is well-formed UTF-8, otherwise the offset of the first
// bad byte.
std::size_t find_invalid_utf8(std::string_view s);

// Shortest decimal that round-trips to the same double; always carries a
// decimal point ("1.0", not "1").
std::string format_double(double v);
// Rounded to `decimals` places with trailing zeros trimmed, keeping at least
// one decimal digit ("0.6111", "0.2", "1.0").
std::string format_rounded(double v, int decimals);
bool parse_double(std::string_view s, double& out);
bool parse_uint(std::string_view s, unsigned long long& out);

}  // namespace fntag::text
