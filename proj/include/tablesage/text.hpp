#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tablesage::text {

std::string trim(std::string_view s);

// Runs of ASCII whitespace become a single space; ends are trimmed.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

// Matching key: trimmed, whitespace collapsed, ASCII case folded.
std::string fold_key(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Counts UTF-8 code points. A stray continuation byte at the start counts as one.
std::size_t utf8_length(std::string_view s);

// Truncates to at most max_chars code points without splitting a sequence.
std::string utf8_truncate(std::string_view s, std::size_t max_chars);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace tablesage::text
