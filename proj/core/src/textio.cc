#include "sffnn/textio.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sffnn/errors.h"
#include "sffnn/unicode.h"

namespace sffnn {
namespace {

std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void Fail(const std::string& path, size_t line_no,
                       const std::string& msg) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + msg);
}

}  // namespace

std::vector<std::string> SplitTokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

void ForEachLine(const std::string& path,
                 const std::function<void(const std::string&, size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    fn(StripCr(line), ++line_no);
  }
}

std::vector<LabeledDoc> ReadLangIdTsv(const std::string& path,
                                      size_t* invalid_utf8) {
  std::vector<LabeledDoc> docs;
  size_t invalid = 0;
  ForEachLine(path, [&](const std::string& line, size_t line_no) {
    if (line.empty()) return;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      Fail(path, line_no, "expected label<TAB>text");
    }
    LabeledDoc doc;
    doc.label = line.substr(0, tab);
    if (doc.label.empty()) Fail(path, line_no, "empty label");
    size_t replaced = 0;
    doc.text = SanitizeUtf8(line.substr(tab + 1), &replaced);
    invalid += replaced;
    docs.push_back(std::move(doc));
  });
  if (invalid_utf8 != nullptr) *invalid_utf8 = invalid;
  return docs;
}

std::vector<Sentence> ReadConllu(const std::string& path,
                                 size_t* invalid_utf8) {
  std::vector<Sentence> sentences;
  Sentence current;
  size_t invalid = 0;
  auto flush = [&]() {
    if (!current.tokens.empty()) {
      sentences.push_back(std::move(current));
      current = Sentence{};
    }
  };
  ForEachLine(path, [&](const std::string& line, size_t line_no) {
    if (line.empty()) {
      flush();
      return;
    }
    if (line[0] == '#') return;
    std::vector<std::string> cols;
    size_t start = 0;
    while (start <= line.size()) {
      size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(start));
        break;
      }
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (cols.size() < 2) Fail(path, line_no, "expected tab-separated columns");
    // Skip multiword-token ranges and empty nodes (1-2, 3.1).
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      return;
    }
    uint32_t index = 0;
    auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), index);
    if (ec != std::errc() || ptr != id.data() + id.size()) {
      Fail(path, line_no, "bad token index '" + id + "'");
    }
    Token token;
    size_t replaced = 0;
    token.form = SanitizeUtf8(cols[1], &replaced);
    invalid += replaced;
    if (token.form.empty()) Fail(path, line_no, "empty token form");
    if (cols.size() >= 4 && cols[3] != "_") token.tag = cols[3];
    current.tokens.push_back(std::move(token));
  });
  flush();
  if (invalid_utf8 != nullptr) *invalid_utf8 = invalid;
  return sentences;
}

std::vector<std::vector<std::string>> ReadSegmentation(const std::string& path,
                                                       size_t* invalid_utf8) {
  std::vector<std::vector<std::string>> lines;
  size_t invalid = 0;
  ForEachLine(path, [&](const std::string& line, size_t line_no) {
    size_t replaced = 0;
    std::string clean = SanitizeUtf8(line, &replaced);
    invalid += replaced;
    std::vector<std::string> words = SplitTokens(clean);
    if (words.empty()) return;
    (void)line_no;
    lines.push_back(std::move(words));
  });
  if (invalid_utf8 != nullptr) *invalid_utf8 = invalid;
  return lines;
}

std::vector<PreorderExample> ReadPreorder(const std::string& path,
                                          size_t* invalid_utf8) {
  std::vector<PreorderExample> examples;
  size_t invalid = 0;
  ForEachLine(path, [&](const std::string& line, size_t line_no) {
    if (line.empty()) return;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      Fail(path, line_no, "expected tokens<TAB>target-order");
    }
    PreorderExample ex;
    size_t replaced = 0;
    ex.tokens = SplitTokens(SanitizeUtf8(line.substr(0, tab), &replaced));
    invalid += replaced;
    if (ex.tokens.empty()) Fail(path, line_no, "no tokens");
    std::vector<std::string> order = SplitTokens(line.substr(tab + 1));
    if (order.size() != ex.tokens.size()) {
      Fail(path, line_no, "target order length does not match token count");
    }
    std::vector<bool> seen(order.size(), false);
    for (const std::string& item : order) {
      uint32_t v = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size() || v < 1 ||
          v > order.size() || seen[v - 1]) {
        Fail(path, line_no, "target order is not a 1-based permutation");
      }
      seen[v - 1] = true;
      ex.target_order.push_back(v - 1);
    }
    examples.push_back(std::move(ex));
  });
  if (invalid_utf8 != nullptr) *invalid_utf8 = invalid;
  return examples;
}

}  // namespace sffnn
