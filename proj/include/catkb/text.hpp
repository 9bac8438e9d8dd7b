#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers and the tokenizers shared by scorers and metrics.
namespace catkb::text {

bool is_valid_utf8(std::string_view s);

/// Number of code points in a valid UTF-8 string.
std::size_t utf8_length(std::string_view s);

/// Byte offset of code point `cp_offset`; `cp_offset == utf8_length(s)` maps to `s.size()`.
/// Throws ContractError when the offset is past the end.
std::size_t utf8_byte_offset(std::string_view s, std::size_t cp_offset);

/// Substring by code point range [start, end).
std::string utf8_slice(std::string_view s, std::size_t start, std::size_t end);

/// Decodes a UTF-8 string into code points. Invalid bytes decode as U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(char32_t cp);

bool is_unicode_space(char32_t cp);

std::string ascii_lower(std::string_view s);

/// Trims and collapses runs of whitespace to a single ASCII space.
std::string collapse_whitespace(std::string_view s);

/// Lowercase, then split on every non-alphanumeric ASCII byte. Non-ASCII bytes are kept
/// inside tokens.
std::vector<std::string> alnum_tokens(std::string_view s);

/// Lowercase, split on Unicode whitespace, strip leading/trailing ASCII punctuation per token,
/// and drop tokens that become empty.
std::vector<std::string> metric_tokens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Splits on every occurrence of `sep`; always returns at least one field.
std::vector<std::string> split(std::string_view s, std::string_view sep);

}  // namespace catkb::text
