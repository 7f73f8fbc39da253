#include "sffnn/unicode.h"

namespace sffnn {
namespace {

inline bool IsContinuation(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

uint32_t DecodeUtf8Char(std::string_view text, size_t* pos) {
  size_t i = *pos;
  unsigned char b0 = static_cast<unsigned char>(text[i]);
  if (b0 < 0x80) {
    *pos = i + 1;
    return b0;
  }
  int len = 0;
  uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    *pos = i + 1;
    return kReplacementChar;
  }
  if (i + len > text.size()) {
    *pos = i + 1;
    return kReplacementChar;
  }
  for (int k = 1; k < len; ++k) {
    unsigned char b = static_cast<unsigned char>(text[i + k]);
    if (!IsContinuation(b)) {
      *pos = i + 1;
      return kReplacementChar;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong encodings, surrogates and out-of-range values.
  static constexpr uint32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMinByLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    *pos = i + 1;
    return kReplacementChar;
  }
  *pos = i + len;
  return cp;
}

std::vector<uint32_t> DecodeUtf8(std::string_view text, size_t* invalid_count) {
  std::vector<uint32_t> out;
  out.reserve(text.size());
  size_t invalid = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t before = pos;
    uint32_t cp = DecodeUtf8Char(text, &pos);
    if (cp == kReplacementChar && pos == before + 1 &&
        static_cast<unsigned char>(text[before]) >= 0x80) {
      ++invalid;
    }
    out.push_back(cp);
  }
  if (invalid_count != nullptr) *invalid_count = invalid;
  return out;
}

std::vector<std::string> SplitUtf8Chars(std::string_view text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t start = pos;
    DecodeUtf8Char(text, &pos);
    out.emplace_back(text.substr(start, pos - start));
  }
  return out;
}

std::string EncodeUtf8(uint32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string SanitizeUtf8(std::string_view text, size_t* replaced) {
  std::string out;
  out.reserve(text.size());
  size_t count = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t start = pos;
    uint32_t cp = DecodeUtf8Char(text, &pos);
    if (cp == kReplacementChar &&
        text.substr(start, pos - start) != "\xEF\xBF\xBD") {
      ++count;
      out += EncodeUtf8(kReplacementChar);
    } else {
      out.append(text.substr(start, pos - start));
    }
  }
  if (replaced != nullptr) *replaced = count;
  return out;
}

bool IsAlphabetic(uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
  }
  struct Range {
    uint32_t lo, hi;
  };
  // Letter blocks of the major scripts. Anything outside is treated as
  // non-alphabetic (punctuation, digits, symbols, separators).
  static constexpr Range kLetterRanges[] = {
      {0x00C0, 0x024F},   // Latin-1 letters + Latin Extended-A/B
      {0x0250, 0x02AF},   // IPA extensions
      {0x0370, 0x03FF},   // Greek
      {0x0400, 0x052F},   // Cyrillic + supplement
      {0x0531, 0x058F},   // Armenian
      {0x05D0, 0x05F2},   // Hebrew letters
      {0x0620, 0x064A},   // Arabic letters
      {0x0660, 0x066F},   // (Arabic digits excluded below)
      {0x0671, 0x06D3},   // Arabic extended letters
      {0x0900, 0x097F},   // Devanagari
      {0x0980, 0x09FF},   // Bengali
      {0x0A00, 0x0DFF},   // Gurmukhi..Sinhala
      {0x0E01, 0x0E5B},   // Thai
      {0x0E81, 0x0EDF},   // Lao
      {0x10A0, 0x10FF},   // Georgian
      {0x1100, 0x11FF},   // Hangul Jamo
      {0x1E00, 0x1FFF},   // Latin/Greek extended additional
      {0x3041, 0x309F},   // Hiragana
      {0x30A1, 0x30FF},   // Katakana
      {0x3400, 0x4DBF},   // CJK extension A
      {0x4E00, 0x9FFF},   // CJK unified
      {0xAC00, 0xD7A3},   // Hangul syllables
      {0xF900, 0xFAFF},   // CJK compatibility
      {0x20000, 0x2A6DF}  // CJK extension B
  };
  if (cp >= 0x0660 && cp <= 0x0669) return false;  // Arabic-Indic digits
  for (const Range& r : kLetterRanges) {
    if (cp >= r.lo && cp <= r.hi) return true;
  }
  return false;
}

}  // namespace sffnn
