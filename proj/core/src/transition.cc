#include "sffnn/transition.h"

#include <algorithm>
#include <sstream>

#include "sffnn/errors.h"

namespace sffnn {

// ---------------------------------------------------------------------------
// Segmentation

bool SegActionLegal(const SegState& state, SegAction action) {
  if (state.Terminal()) return false;
  if (action == SegAction::kMerge) {
    // The first character must start a word: MERGE needs a word in progress.
    return !state.word_starts.empty();
  }
  return true;
}

SegState SegApply(const SegState& state, SegAction action) {
  if (!SegActionLegal(state, action)) {
    throw IllegalTransitionError(
        state.Terminal()
            ? "segmentation: action applied to a terminal state"
            : "segmentation: MERGE before the first SPLIT");
  }
  SegState out = state;
  if (action == SegAction::kSplit) {
    out.word_starts.push_back(out.next);
  }
  out.next += 1;
  return out;
}

std::vector<SegAction> SegOracle(std::span<const uint32_t> word_lengths) {
  std::vector<SegAction> actions;
  for (uint32_t len : word_lengths) {
    if (len == 0) {
      throw DataError("segmentation oracle: zero-length word");
    }
    actions.push_back(SegAction::kSplit);
    for (uint32_t k = 1; k < len; ++k) actions.push_back(SegAction::kMerge);
  }
  return actions;
}

// ---------------------------------------------------------------------------
// Preordering

SpanState SpanState::Initial(uint32_t n) {
  SpanState s;
  for (uint32_t i = 0; i < n; ++i) {
    s.buffer.push_back(Span{{i}, i, false});
  }
  return s;
}

uint32_t SpanState::total_words() const {
  size_t n = 0;
  for (const Span& s : stack) n += s.words.size();
  for (const Span& s : buffer) n += s.words.size();
  return static_cast<uint32_t>(n);
}

bool PreActionLegal(const SpanState& state, PreAction action) {
  switch (action) {
    case PreAction::kShift:
      return !state.buffer.empty();
    case PreAction::kAppend:
      return state.stack.size() >= 2;
    case PreAction::kSwap: {
      if (state.stack.size() < 2) return false;
      const Span& below = state.stack[state.stack.size() - 2];
      const Span& top = state.stack.back();
      return below.origin < top.origin;
    }
  }
  return false;
}

SpanState PreApply(const SpanState& state, PreAction action) {
  if (!PreActionLegal(state, action)) {
    throw IllegalTransitionError("preordering: illegal " + ToString(action));
  }
  SpanState out = state;
  switch (action) {
    case PreAction::kShift:
      out.stack.push_back(std::move(out.buffer.front()));
      out.buffer.pop_front();
      break;
    case PreAction::kAppend: {
      Span top = std::move(out.stack.back());
      out.stack.pop_back();
      Span& below = out.stack.back();
      below.words.insert(below.words.end(), top.words.begin(), top.words.end());
      below.has_swapped = below.has_swapped || top.has_swapped;
      // origin stays the lower span's origin
      break;
    }
    case PreAction::kSwap: {
      Span top = std::move(out.stack.back());
      out.stack.pop_back();
      Span below = std::move(out.stack.back());
      out.stack.pop_back();
      top.has_swapped = true;
      below.has_swapped = true;
      out.stack.push_back(std::move(top));
      out.buffer.push_front(std::move(below));
      break;
    }
  }
  return out;
}

namespace {

void CheckPermutation(std::span<const uint32_t> order) {
  std::vector<bool> seen(order.size(), false);
  for (uint32_t w : order) {
    if (w >= order.size() || seen[w]) {
      throw DataError("preordering: target order is not a permutation");
    }
    seen[w] = true;
  }
}

}  // namespace

std::vector<PreAction> PreOracle(std::span<const uint32_t> target_order,
                                 PreOracleStrategy strategy) {
  CheckPermutation(target_order);
  const uint32_t n = static_cast<uint32_t>(target_order.size());
  // rank[w] = output position of word w.
  std::vector<uint32_t> rank(n);
  for (uint32_t k = 0; k < n; ++k) rank[target_order[k]] = k;

  // Track, per span, the contiguous target-rank block it covers. The sort
  // phase only ever swaps adjacent spans that are out of target order; such
  // a pair has never been transposed before, so its origins are still in
  // original order and the SWAP precondition holds. Merging target-adjacent
  // spans preserves that invariant, so the loop below never gets stuck.
  struct Block {
    uint32_t lo, hi;
  };
  SpanState state = SpanState::Initial(n);
  std::vector<Block> stack_blocks;
  std::deque<Block> buffer_blocks;
  for (uint32_t i = 0; i < n; ++i) buffer_blocks.push_back({rank[i], rank[i]});

  std::vector<PreAction> actions;
  const bool eager = strategy == PreOracleStrategy::kEagerAppend;
  auto apply = [&](PreAction a) {
    actions.push_back(a);
    state = PreApply(state, a);
    switch (a) {
      case PreAction::kShift:
        stack_blocks.push_back(buffer_blocks.front());
        buffer_blocks.pop_front();
        break;
      case PreAction::kAppend: {
        Block top = stack_blocks.back();
        stack_blocks.pop_back();
        stack_blocks.back().hi = top.hi;
        break;
      }
      case PreAction::kSwap: {
        Block top = stack_blocks.back();
        stack_blocks.pop_back();
        Block below = stack_blocks.back();
        stack_blocks.pop_back();
        stack_blocks.push_back(top);
        buffer_blocks.push_front(below);
        break;
      }
    }
  };

  while (!(state.buffer.empty() && state.stack.size() == 1)) {
    if (stack_blocks.size() >= 2) {
      const Block& below = stack_blocks[stack_blocks.size() - 2];
      const Block& top = stack_blocks.back();
      if (below.lo > top.lo) {
        apply(PreAction::kSwap);
        continue;
      }
      if (below.hi + 1 == top.lo && (eager || state.buffer.empty())) {
        apply(PreAction::kAppend);
        continue;
      }
    }
    if (!state.buffer.empty()) {
      apply(PreAction::kShift);
      continue;
    }
    // Buffer empty, stack sorted but a pair is non-adjacent: impossible,
    // since the stack blocks tile the whole rank range in order.
    throw InternalError("preordering oracle: wedged state");
  }
  return actions;
}

std::vector<uint32_t> TerminalOrder(const SpanState& state) {
  if (!state.Terminal()) {
    throw InternalError("preordering: reading order of a non-terminal state");
  }
  return state.stack.front().words;
}

// ---------------------------------------------------------------------------
// Greedy decoding

namespace {

template <typename ActionT>
int BestLegalAction(std::span<const float> scores,
                    const std::function<bool(ActionT)>& legal) {
  int best = -1;
  for (size_t a = 0; a < scores.size(); ++a) {
    if (!legal(static_cast<ActionT>(a))) continue;
    if (best < 0 || scores[a] > scores[best]) best = static_cast<int>(a);
  }
  return best;
}

}  // namespace

SegDecodeResult GreedyDecodeSeg(
    uint32_t total_chars,
    const std::function<std::vector<float>(const SegState&)>& score) {
  SegDecodeResult result;
  result.state = SegState::Initial(total_chars);
  while (!result.state.Terminal()) {
    std::vector<float> scores = score(result.state);
    int a = BestLegalAction<SegAction>(
        scores, [&](SegAction x) { return SegActionLegal(result.state, x); });
    if (a < 0) throw InternalError("segmentation decode: no legal action");
    result.state = SegApply(result.state, static_cast<SegAction>(a));
    result.actions.push_back(static_cast<SegAction>(a));
  }
  return result;
}

PreDecodeResult GreedyDecodePre(
    uint32_t total_words,
    const std::function<std::vector<float>(const SpanState&)>& score) {
  PreDecodeResult result;
  result.state = SpanState::Initial(total_words);
  if (total_words == 0) return result;
  const uint64_t step_limit = 4ull * total_words * total_words;
  uint64_t steps = 0;
  while (!result.state.Terminal()) {
    if (++steps > step_limit) {
      throw InternalError("preordering decode: exceeded 4n^2 steps");
    }
    std::vector<float> scores = score(result.state);
    int a = BestLegalAction<PreAction>(
        scores, [&](PreAction x) { return PreActionLegal(result.state, x); });
    if (a < 0) throw InternalError("preordering decode: no legal action");
    result.state = PreApply(result.state, static_cast<PreAction>(a));
    result.actions.push_back(static_cast<PreAction>(a));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization of derivations

std::string ToString(SegAction a) {
  return a == SegAction::kSplit ? "SPLIT" : "MERGE";
}

std::string ToString(PreAction a) {
  switch (a) {
    case PreAction::kAppend:
      return "APPEND";
    case PreAction::kShift:
      return "SHIFT";
    case PreAction::kSwap:
      return "SWAP";
  }
  return "?";
}

namespace {

template <typename ActionT>
std::string ActionsToString(std::span<const ActionT> actions) {
  std::string out;
  for (size_t i = 0; i < actions.size(); ++i) {
    if (i > 0) out += ' ';
    out += ToString(actions[i]);
  }
  return out;
}

}  // namespace

std::string SegActionsToString(std::span<const SegAction> actions) {
  return ActionsToString(actions);
}

std::string PreActionsToString(std::span<const PreAction> actions) {
  return ActionsToString(actions);
}

std::vector<SegAction> ParseSegActions(std::string_view text) {
  std::vector<SegAction> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    if (tok == "SPLIT") {
      out.push_back(SegAction::kSplit);
    } else if (tok == "MERGE") {
      out.push_back(SegAction::kMerge);
    } else {
      throw DataError("unknown segmentation action '" + tok + "'");
    }
  }
  return out;
}

std::vector<PreAction> ParsePreActions(std::string_view text) {
  std::vector<PreAction> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    if (tok == "APPEND") {
      out.push_back(PreAction::kAppend);
    } else if (tok == "SHIFT") {
      out.push_back(PreAction::kShift);
    } else if (tok == "SWAP") {
      out.push_back(PreAction::kSwap);
    } else {
      throw DataError("unknown preordering action '" + tok + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fuzzy reordering score

double FuzzyReorderingScore(std::span<const uint32_t> predicted,
                            std::span<const uint32_t> reference) {
  if (predicted.size() != reference.size() || predicted.empty()) {
    throw DataError("fuzzy reordering score: length mismatch");
  }
  CheckPermutation(predicted);
  CheckPermutation(reference);
  const size_t n = predicted.size();
  if (n == 1) return 1.0;
  std::vector<uint32_t> ref_pos(n);
  for (uint32_t k = 0; k < n; ++k) ref_pos[reference[k]] = k;
  uint32_t chunks = 1;
  for (size_t k = 1; k < n; ++k) {
    if (ref_pos[predicted[k]] != ref_pos[predicted[k - 1]] + 1) ++chunks;
  }
  return 1.0 - static_cast<double>(chunks - 1) / static_cast<double>(n - 1);
}

void FrsAccumulator::Add(std::span<const uint32_t> predicted,
                         std::span<const uint32_t> reference) {
  double frs = FuzzyReorderingScore(predicted, reference);
  double w = predicted.size() > 1 ? static_cast<double>(predicted.size() - 1) : 0.0;
  weighted_sum_ += frs * w;
  weight_ += w;
}

double FrsAccumulator::Score() const {
  if (weight_ == 0) return 1.0;
  return weighted_sum_ / weight_;
}

}  // namespace sffnn
