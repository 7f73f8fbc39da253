#include "sffnn/metrics.h"

#include <cstdint>
#include <utility>

#include "sffnn/errors.h"
#include "sffnn/unicode.h"

namespace sffnn {

double MicroF1(std::span<const std::string> gold,
               std::span<const std::string> predicted) {
  if (gold.size() != predicted.size()) {
    throw DataError("micro-F1: gold and predictions are misaligned");
  }
  if (gold.empty()) throw DataError("micro-F1: empty evaluation set");
  // Micro counts: each wrong document is one false positive (for the
  // predicted class) and one false negative (for the gold class).
  uint64_t tp_total = 0, fp_total = 0, fn_total = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == predicted[i]) {
      tp_total += 1;
    } else {
      fp_total += 1;  // predicted class gains a false positive
      fn_total += 1;  // gold class gains a false negative
    }
  }
  double p = tp_total + fp_total == 0
                 ? 0.0
                 : static_cast<double>(tp_total) / (tp_total + fp_total);
  double r = tp_total + fn_total == 0
                 ? 0.0
                 : static_cast<double>(tp_total) / (tp_total + fn_total);
  if (p + r == 0) return 0.0;
  return 2 * p * r / (p + r);
}

double TokenAccuracy(const std::vector<std::vector<std::string>>& gold,
                     const std::vector<std::vector<std::string>>& predicted) {
  if (gold.size() != predicted.size()) {
    throw DataError("token accuracy: sentence counts differ");
  }
  uint64_t correct = 0, total = 0;
  for (size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) {
      throw DataError("token accuracy: sentence " + std::to_string(s + 1) +
                      " lengths differ");
    }
    for (size_t t = 0; t < gold[s].size(); ++t) {
      total += 1;
      if (gold[s][t] == predicted[s][t]) correct += 1;
    }
  }
  if (total == 0) throw DataError("token accuracy: no tokens");
  return static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

// Word spans as (start, end) offsets in characters.
std::vector<std::pair<uint32_t, uint32_t>> WordSpans(
    const std::vector<std::string>& words) {
  std::vector<std::pair<uint32_t, uint32_t>> spans;
  uint32_t pos = 0;
  for (const std::string& w : words) {
    uint32_t len = static_cast<uint32_t>(SplitUtf8Chars(w).size());
    spans.emplace_back(pos, pos + len);
    pos += len;
  }
  return spans;
}

}  // namespace

double SegmentationWordF1(const std::vector<std::vector<std::string>>& gold,
                          const std::vector<std::vector<std::string>>& predicted) {
  if (gold.size() != predicted.size()) {
    throw DataError("word F1: line counts differ");
  }
  uint64_t matches = 0, gold_total = 0, pred_total = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    auto gspans = WordSpans(gold[i]);
    auto pspans = WordSpans(predicted[i]);
    if ((gspans.empty() ? 0 : gspans.back().second) !=
        (pspans.empty() ? 0 : pspans.back().second)) {
      throw DataError("word F1: line " + std::to_string(i + 1) +
                      " character sequences differ");
    }
    gold_total += gspans.size();
    pred_total += pspans.size();
    size_t g = 0, p = 0;
    while (g < gspans.size() && p < pspans.size()) {
      if (gspans[g] == pspans[p]) {
        ++matches;
        ++g;
        ++p;
      } else if (gspans[g].second <= pspans[p].second) {
        ++g;
      } else {
        ++p;
      }
    }
  }
  if (gold_total == 0 || pred_total == 0) {
    throw DataError("word F1: empty corpus");
  }
  double precision = static_cast<double>(matches) / pred_total;
  double recall = static_cast<double>(matches) / gold_total;
  if (precision + recall == 0) return 0.0;
  return 2 * precision * recall / (precision + recall);
}

}  // namespace sffnn
