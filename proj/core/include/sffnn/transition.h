#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sffnn {

// ---------------------------------------------------------------------------
// Segmentation: two actions over a character buffer. SPLIT starts a new word
// at the buffer-front character, MERGE attaches it to the current word.
// Every derivation consumes exactly one character per action, so it takes
// exactly n actions; the terminal stack holds the word-start indices.

enum class SegAction : uint8_t { kSplit = 0, kMerge = 1 };

constexpr int kNumSegActions = 2;

struct SegState {
  uint32_t total_chars = 0;  // n
  uint32_t next = 0;         // buffer front; buffer is [next, n)
  std::vector<uint32_t> word_starts;

  static SegState Initial(uint32_t n) { return {n, 0, {}}; }
  bool Terminal() const { return next == total_chars; }
  bool BufferEmpty() const { return Terminal(); }
};

bool SegActionLegal(const SegState& state, SegAction action);
SegState SegApply(const SegState& state, SegAction action);

// Static oracle: SPLIT at each word-initial character, MERGE elsewhere.
std::vector<SegAction> SegOracle(std::span<const uint32_t> word_lengths);

// ---------------------------------------------------------------------------
// Preordering: spans of words move between a buffer and a stack. APPEND
// concatenates the top two stack spans; SHIFT moves the buffer front onto
// the stack; SWAP sends the lower of the top two spans back to the buffer
// front, legal only while the lower span's origin precedes the upper's.
// The origin of a span is the original index of its leftmost word at
// creation, which makes each span pair swappable at most once and bounds
// every derivation by O(n^2) actions.

enum class PreAction : uint8_t { kAppend = 0, kShift = 1, kSwap = 2 };

constexpr int kNumPreActions = 3;

struct Span {
  std::vector<uint32_t> words;  // 0-based original word indexes, reading order
  uint32_t origin = 0;
  bool has_swapped = false;
};

struct SpanState {
  std::vector<Span> stack;
  std::deque<Span> buffer;

  static SpanState Initial(uint32_t n);
  bool Terminal() const { return buffer.empty() && stack.size() == 1; }
  uint32_t total_words() const;
};

bool PreActionLegal(const SpanState& state, PreAction action);
SpanState PreApply(const SpanState& state, PreAction action);

enum class PreOracleStrategy {
  // Sort spans into target order with SHIFT/SWAP, then APPEND n-1 times.
  kBubbleSort,
  // Same, but APPEND as soon as the top two spans are adjacent in the
  // target; yields shorter derivations.
  kEagerAppend,
};

// target_order[k] = 0-based index of the word that should appear k-th in
// the output. Must be a permutation of 0..n-1.
std::vector<PreAction> PreOracle(std::span<const uint32_t> target_order,
                                 PreOracleStrategy strategy =
                                     PreOracleStrategy::kEagerAppend);

// Reading order of the single terminal span.
std::vector<uint32_t> TerminalOrder(const SpanState& state);

// ---------------------------------------------------------------------------
// Greedy decoding: repeatedly score all actions, mask the illegal ones and
// apply the best legal action until the state is terminal. Scores come from
// a caller-supplied function so the decoder is independent of the network.

struct SegDecodeResult {
  SegState state;
  std::vector<SegAction> actions;
};

struct PreDecodeResult {
  SpanState state;
  std::vector<PreAction> actions;
};

SegDecodeResult GreedyDecodeSeg(
    uint32_t total_chars,
    const std::function<std::vector<float>(const SegState&)>& score);

PreDecodeResult GreedyDecodePre(
    uint32_t total_words,
    const std::function<std::vector<float>(const SpanState&)>& score);

// Derivations serialize as whitespace-separated action names.
std::string ToString(SegAction a);
std::string ToString(PreAction a);
std::string SegActionsToString(std::span<const SegAction> actions);
std::string PreActionsToString(std::span<const PreAction> actions);
std::vector<SegAction> ParseSegActions(std::string_view text);
std::vector<PreAction> ParsePreActions(std::string_view text);

// ---------------------------------------------------------------------------
// Fuzzy reordering score: 1 - (C - 1)/(n - 1) where C counts the maximal
// chunks of the predicted sequence that are contiguous and in order in the
// reference; 1.0 for single-word inputs.

double FuzzyReorderingScore(std::span<const uint32_t> predicted,
                            std::span<const uint32_t> reference);

// Corpus aggregate: micro average weighted by (n - 1) per sentence, so
// single-word sentences carry weight zero. 1.0 when no sentence has weight.
class FrsAccumulator {
 public:
  void Add(std::span<const uint32_t> predicted,
           std::span<const uint32_t> reference);
  double Score() const;

 private:
  double weighted_sum_ = 0;
  double weight_ = 0;
};

}  // namespace sffnn
