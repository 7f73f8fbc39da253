#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sffnn/bloom_map.h"
#include "sffnn/transition.h"

namespace sffnn {

// Reserved feature ids, shared by every group: id 0 marks an address that
// fell outside the context (missing token, empty stack, byte past the end
// of a word), id 1 a failed lookup (unknown lexicon entry, absent cluster,
// word with no n-grams). Hashed ids are offset past these, so the hashed
// range is [2, V).
constexpr uint32_t kPadId = 0;
constexpr uint32_t kUnknownId = 1;
constexpr uint32_t kNumReservedIds = 2;

enum class Pooling : uint8_t { kConcat = 0, kAverage = 1, kSum = 2 };

struct FeatureGroup {
  std::string name;
  uint32_t vocab_size = 0;     // V, includes the reserved ids
  uint32_t embedding_dim = 0;  // D
  Pooling pooling = Pooling::kConcat;
  bool hashed = false;
};

enum class Extractor : uint8_t {
  kCharNgram,   // n-grams of unicode scalars; set per word, multiset per doc
  kByte,        // one UTF-8 byte of a word, indexed from the start or end
  kCluster,     // cluster id of a word via the Bloom map resource
  kLength,      // clipped distance between stack top and buffer front
  kHasSwapped,  // whether the addressed span has taken part in a SWAP
  kTag,         // POS tag of a word via the group's tag lexicon
};

// Where a template looks. Token offsets address the tagging window; seg
// positions are character offsets from the stack-top/buffer-front anchors;
// span positions name a stack/buffer span plus a word inside it, with an
// optional sentence-relative window offset for imported tagger features.
struct Position {
  enum class Kind : uint8_t {
    kDocument,     // the whole (preprocessed) text
    kTokenOffset,  // token at focus + index
    kSegStack,     // character at stack_top + index
    kSegBuffer,    // character at buffer_front + index
    kSpanStack,    // span index counted from the stack top
    kSpanBuffer,   // span index counted from the buffer front
    kState,        // anchor-free state feature (length)
  };
  enum class WordSel : uint8_t { kNone, kFirst, kSecond, kLast, kLastMinus1 };

  Kind kind = Kind::kTokenOffset;
  int index = 0;
  WordSel word = WordSel::kNone;
  int window = 0;  // sentence offset applied after span resolution

  static Position Parse(std::string_view token);
  std::string ToString() const;
};

struct FeatureTemplate {
  uint32_t group = 0;  // index into TemplateSet::groups
  Extractor extractor = Extractor::kCharNgram;
  int ngram_order = 0;
  int byte_index = 0;
  bool byte_from_end = false;
  int length_clip = 0;
  std::vector<Position> positions;
};

// A parsed template configuration: `group` lines declare feature groups,
// `template` lines bind an extractor and a position list to a group. Slot
// indexes for concat groups are assigned in declaration order.
struct TemplateSet {
  std::vector<FeatureGroup> groups;
  std::vector<FeatureTemplate> templates;
  std::vector<uint32_t> slots;  // per group; 1 for average/sum groups

  static TemplateSet Parse(std::string_view text);

  int GroupIndex(std::string_view name) const;
  uint32_t TotalConcatSlots() const;
};

struct FeatureHit {
  uint32_t group = 0;
  uint32_t slot = 0;
  uint32_t id = 0;

  friend bool operator==(const FeatureHit&, const FeatureHit&) = default;
};

// Sparse extraction result. For concat groups every slot carries at least
// one hit; a slot with several hits embeds as the mean of its rows (a word
// has a set of n-grams but one slot). Average/sum groups may carry any
// number of hits.
struct FeatureVector {
  std::vector<FeatureHit> hits;
};

struct Token {
  std::string form;
  std::string tag;  // empty when not available
};

struct DocumentContext {
  std::string_view text;
};

struct TokenWindowContext {
  std::span<const Token> tokens;
  int focus = 0;
};

struct SegContext {
  std::span<const std::string> chars;  // unicode characters of the input
  const SegState* state = nullptr;
};

struct SpanContext {
  std::span<const Token> tokens;
  const SpanState* state = nullptr;
};

// Closed lexicon with a frequency cutoff; ids start after the reserved ids
// in build order (most frequent first, ties by string).
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<std::string> entries);

  static Lexicon Build(const std::unordered_map<std::string, uint64_t>& counts,
                       uint64_t min_count);

  uint32_t Lookup(std::string_view key) const;  // kUnknownId when absent
  uint32_t size() const { return static_cast<uint32_t>(entries_.size()); }
  uint32_t vocab_size() const { return size() + kNumReservedIds; }
  const std::vector<std::string>& entries() const { return entries_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, uint32_t> ids_;
};

struct ExtractionResources {
  const BloomMap* clusters = nullptr;
  const std::map<std::string, Lexicon>* lexicons = nullptr;  // by group name
};

// n-grams over unicode scalar values, one entry per occurrence. Text
// shorter than n yields the empty collection.
std::vector<std::string> CharNgrams(std::string_view text, int n);

FeatureVector ApplyTemplates(const TemplateSet& set, const DocumentContext& ctx,
                             const ExtractionResources& res);
FeatureVector ApplyTemplates(const TemplateSet& set,
                             const TokenWindowContext& ctx,
                             const ExtractionResources& res);
FeatureVector ApplyTemplates(const TemplateSet& set, const SegContext& ctx,
                             const ExtractionResources& res);
FeatureVector ApplyTemplates(const TemplateSet& set, const SpanContext& ctx,
                             const ExtractionResources& res);

}  // namespace sffnn
