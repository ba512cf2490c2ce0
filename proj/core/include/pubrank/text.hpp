#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pubrank::text {

/// Unicode White_Space property, on a decoded code point.
bool is_space(char32_t cp) noexcept;

/// A token is a maximal run of non-whitespace code points. Views point into `s`.
/// Invalid UTF-8 bytes are treated as non-whitespace.
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Trims and replaces every whitespace run with one ASCII space.
std::string collapse_whitespace(std::string_view s);

std::string trim(std::string_view s);

std::string ascii_lower(std::string_view s);

/// Longest prefix of at most `max_code_points` code points, never splitting a
/// UTF-8 sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t max_code_points) noexcept;

std::size_t utf8_length(std::string_view s) noexcept;

/// Answer normalization shared by the answer parser and the Phase B metrics:
/// lowercase, trim, collapse internal whitespace, strip surrounding ASCII punctuation.
std::string normalize_answer(std::string_view s);

/// Hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace pubrank::text
