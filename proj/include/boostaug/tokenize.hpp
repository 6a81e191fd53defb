#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace boostaug {

struct Token {
  std::string text;
  std::size_t offset = 0;  // byte offset into the source string
};

/// Whitespace split with leading and trailing ASCII punctuation detached as
/// single-character tokens: "good, fast!" -> good , fast !
std::vector<Token> tokenize_with_offsets(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

/// Joins with single spaces. Not the inverse of tokenize().
std::string detokenize(const std::vector<std::string>& tokens);

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

/// Number of UTF-8 code points; continuation bytes are not counted.
std::size_t utf8_length(std::string_view s);
/// Byte offset of the code point with index `cp` (cp may equal utf8_length).
std::size_t utf8_offset(std::string_view s, std::size_t cp);

}  // namespace boostaug
