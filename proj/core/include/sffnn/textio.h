#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sffnn/features.h"

namespace sffnn {

// Ingestion formats. All readers sanitize to valid UTF-8 (malformed bytes
// become U+FFFD and are counted) and report errors with line numbers.

struct LabeledDoc {
  std::string label;
  std::string text;
};

// "label<TAB>text", one document per line.
std::vector<LabeledDoc> ReadLangIdTsv(const std::string& path,
                                      size_t* invalid_utf8 = nullptr);

struct Sentence {
  std::vector<Token> tokens;
};

// CoNLL-U subset: column 1 = index, column 2 = form, column 4 = UPOS;
// blank line separates sentences; '#' comment lines and multiword-token
// ranges are skipped.
std::vector<Sentence> ReadConllu(const std::string& path,
                                 size_t* invalid_utf8 = nullptr);

// One line per sentence, gold words joined by single spaces. The character
// sequence is the line with the spaces removed.
std::vector<std::vector<std::string>> ReadSegmentation(
    const std::string& path, size_t* invalid_utf8 = nullptr);

struct PreorderExample {
  std::vector<std::string> tokens;
  std::vector<uint32_t> target_order;  // 0-based reading order
};

// Two tab-separated fields: space-joined tokens, space-joined 1-based
// target-order indexes (a permutation of 1..n).
std::vector<PreorderExample> ReadPreorder(const std::string& path,
                                          size_t* invalid_utf8 = nullptr);

std::vector<std::string> SplitTokens(std::string_view line);

// Streams a file line by line in bounded memory.
void ForEachLine(const std::string& path,
                 const std::function<void(const std::string&, size_t)>& fn);

}  // namespace sffnn
