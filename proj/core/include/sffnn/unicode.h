#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sffnn {

constexpr uint32_t kReplacementChar = 0xFFFD;

// Decodes one UTF-8 scalar starting at text[pos]. Advances pos past the
// sequence (or past one byte for invalid input) and returns the code point,
// U+FFFD on malformed sequences.
uint32_t DecodeUtf8Char(std::string_view text, size_t* pos);

// All code points of `text`; malformed bytes become U+FFFD.
std::vector<uint32_t> DecodeUtf8(std::string_view text,
                                 size_t* invalid_count = nullptr);

// Splits `text` into per-character strings on UTF-8 boundaries. Malformed
// bytes are kept verbatim as single-byte entries so that joining the parts
// always reconstructs the input.
std::vector<std::string> SplitUtf8Chars(std::string_view text);

std::string EncodeUtf8(uint32_t code_point);

// Replaces malformed UTF-8 with U+FFFD; `replaced` counts substitutions.
std::string SanitizeUtf8(std::string_view text, size_t* replaced = nullptr);

// Letter test used by the language-id preprocessor. ASCII follows isalpha;
// beyond ASCII this is a table of letter script ranges, which is all the
// preprocessing needs (digits, punctuation and symbols are what it strips).
bool IsAlphabetic(uint32_t code_point);

}  // namespace sffnn
