#include "sffnn/features.h"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "sffnn/errors.h"
#include "sffnn/hashing.h"
#include "sffnn/unicode.h"

namespace sffnn {

// ---------------------------------------------------------------------------
// Lexicon

Lexicon::Lexicon(std::vector<std::string> entries)
    : entries_(std::move(entries)) {
  ids_.reserve(entries_.size());
  for (uint32_t i = 0; i < entries_.size(); ++i) {
    ids_.emplace(entries_[i], kNumReservedIds + i);
  }
}

Lexicon Lexicon::Build(const std::unordered_map<std::string, uint64_t>& counts,
                       uint64_t min_count) {
  std::vector<std::pair<std::string, uint64_t>> kept;
  kept.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    if (count >= min_count) kept.emplace_back(key, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> entries;
  entries.reserve(kept.size());
  for (auto& [key, count] : kept) entries.push_back(std::move(key));
  return Lexicon(std::move(entries));
}

uint32_t Lexicon::Lookup(std::string_view key) const {
  auto it = ids_.find(std::string(key));
  return it == ids_.end() ? kUnknownId : it->second;
}

// ---------------------------------------------------------------------------
// n-gram extraction

std::vector<std::string> CharNgrams(std::string_view text, int n) {
  std::vector<std::string> chars = SplitUtf8Chars(text);
  std::vector<std::string> out;
  if (n <= 0 || chars.size() < static_cast<size_t>(n)) return out;
  out.reserve(chars.size() - n + 1);
  for (size_t i = 0; i + n <= chars.size(); ++i) {
    std::string gram;
    for (int k = 0; k < n; ++k) gram += chars[i + k];
    out.push_back(std::move(gram));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Position parsing

Position Position::Parse(std::string_view token) {
  Position p;
  auto fail = [&]() -> Position {
    throw ConfigError("bad template position '" + std::string(token) + "'");
  };
  if (token == "doc") {
    p.kind = Kind::kDocument;
    return p;
  }
  if (token == "state") {
    p.kind = Kind::kState;
    return p;
  }
  auto parse_int = [&](std::string_view s) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail();
    return value;
  };
  if (token.starts_with("stack:")) {
    p.kind = Kind::kSegStack;
    p.index = parse_int(token.substr(6));
    return p;
  }
  if (token.starts_with("buffer:")) {
    p.kind = Kind::kSegBuffer;
    p.index = parse_int(token.substr(7));
    return p;
  }
  if (token.starts_with("s") || token.starts_with("b")) {
    char c = token[0];
    size_t at = token.find('@');
    std::string_view body = token.substr(0, at);
    if (at != std::string_view::npos) {
      p.window = parse_int(token.substr(at + 1));
    }
    size_t colon = body.find(':');
    std::string_view idx = body.substr(1, colon == std::string_view::npos
                                              ? std::string_view::npos
                                              : colon - 1);
    if (!idx.empty() && idx.find_first_not_of("0123456789") == std::string_view::npos) {
      p.kind = c == 's' ? Kind::kSpanStack : Kind::kSpanBuffer;
      p.index = parse_int(idx);
      if (colon == std::string_view::npos) {
        p.word = WordSel::kNone;
      } else {
        std::string_view sel = body.substr(colon + 1);
        if (sel == "first") {
          p.word = WordSel::kFirst;
        } else if (sel == "second") {
          p.word = WordSel::kSecond;
        } else if (sel == "last") {
          p.word = WordSel::kLast;
        } else if (sel == "last2") {
          p.word = WordSel::kLastMinus1;
        } else {
          fail();
        }
      }
      return p;
    }
  }
  // Plain integer: token offset relative to the focus token.
  p.kind = Kind::kTokenOffset;
  p.index = parse_int(token);
  return p;
}

std::string Position::ToString() const {
  switch (kind) {
    case Kind::kDocument:
      return "doc";
    case Kind::kState:
      return "state";
    case Kind::kTokenOffset:
      return std::to_string(index);
    case Kind::kSegStack:
      return "stack:" + std::to_string(index);
    case Kind::kSegBuffer:
      return "buffer:" + std::to_string(index);
    case Kind::kSpanStack:
    case Kind::kSpanBuffer: {
      std::string out = (kind == Kind::kSpanStack ? "s" : "b") +
                        std::to_string(index);
      switch (word) {
        case WordSel::kNone:
          break;
        case WordSel::kFirst:
          out += ":first";
          break;
        case WordSel::kSecond:
          out += ":second";
          break;
        case WordSel::kLast:
          out += ":last";
          break;
        case WordSel::kLastMinus1:
          out += ":last2";
          break;
      }
      if (window != 0) out += "@" + std::to_string(window);
      return out;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Template set parsing

namespace {

std::vector<std::string> SplitWs(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string_view> SplitChar(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

int ParseIntOrThrow(std::string_view s, const std::string& what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("bad " + what + " '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

TemplateSet TemplateSet::Parse(std::string_view text) {
  TemplateSet set;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::vector<std::string> toks = SplitWs(line);
    if (toks.empty()) continue;
    auto fail = [&](const std::string& msg) {
      throw ConfigError("templates line " + std::to_string(line_no) + ": " + msg);
    };
    if (toks[0] == "group") {
      if (toks.size() < 2) fail("group needs a name");
      FeatureGroup g;
      g.name = toks[1];
      if (set.GroupIndex(g.name) >= 0) fail("duplicate group '" + g.name + "'");
      for (size_t i = 2; i < toks.size(); ++i) {
        size_t eq = toks[i].find('=');
        if (eq == std::string::npos) fail("expected key=value, got '" + toks[i] + "'");
        std::string key = toks[i].substr(0, eq);
        std::string value = toks[i].substr(eq + 1);
        if (key == "vocab") {
          g.vocab_size = value == "auto"
                             ? 0
                             : static_cast<uint32_t>(ParseIntOrThrow(value, "vocab"));
        } else if (key == "dim") {
          g.embedding_dim = static_cast<uint32_t>(ParseIntOrThrow(value, "dim"));
        } else if (key == "pooling") {
          if (value == "concat") {
            g.pooling = Pooling::kConcat;
          } else if (value == "average") {
            g.pooling = Pooling::kAverage;
          } else if (value == "sum") {
            g.pooling = Pooling::kSum;
          } else {
            fail("unknown pooling '" + value + "'");
          }
        } else if (key == "hashed") {
          g.hashed = value == "1" || value == "true";
        } else {
          fail("unknown group key '" + key + "'");
        }
      }
      if (g.embedding_dim == 0) fail("group '" + g.name + "' needs dim>=1");
      if (g.hashed && g.vocab_size <= kNumReservedIds) {
        fail("hashed group '" + g.name + "' needs an explicit vocab > " +
             std::to_string(kNumReservedIds));
      }
      set.groups.push_back(std::move(g));
    } else if (toks[0] == "template") {
      if (toks.size() != 4) fail("expected: template <group> <extractor> <positions>");
      FeatureTemplate t;
      int gi = set.GroupIndex(toks[1]);
      if (gi < 0) fail("template references unregistered group '" + toks[1] + "'");
      t.group = static_cast<uint32_t>(gi);
      std::vector<std::string_view> ex = SplitChar(toks[2], ':');
      if (ex[0] == "char-ngram") {
        if (ex.size() != 2) fail("char-ngram needs an order, e.g. char-ngram:2");
        t.extractor = Extractor::kCharNgram;
        t.ngram_order = ParseIntOrThrow(ex[1], "n-gram order");
        if (t.ngram_order < 1 || t.ngram_order > 4) fail("n-gram order must be 1..4");
      } else if (ex[0] == "byte") {
        if (ex.size() != 3) fail("byte needs side and index, e.g. byte:start:0");
        t.extractor = Extractor::kByte;
        if (ex[1] == "start") {
          t.byte_from_end = false;
        } else if (ex[1] == "end") {
          t.byte_from_end = true;
        } else {
          fail("byte side must be start or end");
        }
        t.byte_index = ParseIntOrThrow(ex[2], "byte index");
        if (t.byte_index < 0 || t.byte_index > 3) fail("byte index must be 0..3");
      } else if (ex[0] == "cluster") {
        t.extractor = Extractor::kCluster;
      } else if (ex[0] == "length") {
        if (ex.size() != 2) fail("length needs a clip value, e.g. length:100");
        t.extractor = Extractor::kLength;
        t.length_clip = ParseIntOrThrow(ex[1], "length clip");
        if (t.length_clip <= 0) fail("length clip must be positive");
      } else if (ex[0] == "has-swapped") {
        t.extractor = Extractor::kHasSwapped;
      } else if (ex[0] == "tag") {
        t.extractor = Extractor::kTag;
      } else {
        fail("unknown extractor '" + std::string(ex[0]) + "'");
      }
      for (std::string_view pos : SplitChar(toks[3], ',')) {
        if (pos.empty()) fail("empty position");
        t.positions.push_back(Position::Parse(pos));
      }
      if (t.positions.empty()) fail("template needs at least one position");
      set.templates.push_back(std::move(t));
    } else {
      throw ConfigError("templates line " + std::to_string(line_no) +
                        ": expected 'group' or 'template', got '" + toks[0] + "'");
    }
  }
  // Assign slot counts: concat groups get one slot per template position.
  set.slots.assign(set.groups.size(), 0);
  for (const FeatureTemplate& t : set.templates) {
    if (set.groups[t.group].pooling == Pooling::kConcat) {
      set.slots[t.group] += static_cast<uint32_t>(t.positions.size());
    }
  }
  for (size_t g = 0; g < set.groups.size(); ++g) {
    if (set.groups[g].pooling != Pooling::kConcat) set.slots[g] = 1;
  }
  return set;
}

int TemplateSet::GroupIndex(std::string_view name) const {
  for (size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

uint32_t TemplateSet::TotalConcatSlots() const {
  uint32_t total = 0;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].pooling == Pooling::kConcat) total += slots[g];
  }
  return total;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

class Emitter {
 public:
  Emitter(const TemplateSet& set, const ExtractionResources& res,
          FeatureVector* out)
      : set_(set), res_(res), out_(out), next_slot_(set.groups.size(), 0) {}

  // Called once per (template, position) pair, in declaration order.
  uint32_t ClaimSlot(const FeatureTemplate& t) {
    if (set_.groups[t.group].pooling != Pooling::kConcat) return 0;
    return next_slot_[t.group]++;
  }

  void Emit(const FeatureTemplate& t, uint32_t slot, uint32_t id) {
    out_->hits.push_back(FeatureHit{t.group, slot, id});
  }

  // Maps a raw string feature to an id via hashing or the group's lexicon.
  uint32_t StringId(const FeatureTemplate& t, std::string_view raw) const {
    const FeatureGroup& g = set_.groups[t.group];
    if (g.hashed) {
      return kNumReservedIds +
             HashFeature(raw, g.vocab_size - kNumReservedIds);
    }
    if (res_.lexicons != nullptr) {
      auto it = res_.lexicons->find(g.name);
      if (it != res_.lexicons->end()) return it->second.Lookup(raw);
    }
    throw ConfigError("group '" + g.name + "' is not hashed and has no lexicon");
  }

  // Word-addressed extractors; token == nullptr means the address was out
  // of range.
  void EmitWord(const FeatureTemplate& t, uint32_t slot, const Token* token) {
    if (token == nullptr) {
      Emit(t, slot, kPadId);
      return;
    }
    switch (t.extractor) {
      case Extractor::kCharNgram: {
        std::vector<std::string> grams = CharNgrams(token->form, t.ngram_order);
        if (grams.empty()) {
          Emit(t, slot, kUnknownId);
          return;
        }
        // Set semantics per word: each distinct n-gram once.
        std::vector<std::string_view> seen;
        for (const std::string& gram : grams) {
          if (std::find(seen.begin(), seen.end(), gram) != seen.end()) continue;
          seen.push_back(gram);
          Emit(t, slot, StringId(t, gram));
        }
        return;
      }
      case Extractor::kByte: {
        const std::string& form = token->form;
        size_t j = static_cast<size_t>(t.byte_index);
        if (j >= form.size()) {
          Emit(t, slot, kPadId);
          return;
        }
        unsigned char b = static_cast<unsigned char>(
            t.byte_from_end ? form[form.size() - 1 - j] : form[j]);
        Emit(t, slot, kNumReservedIds + b);
        return;
      }
      case Extractor::kCluster: {
        if (res_.clusters == nullptr) {
          Emit(t, slot, kUnknownId);
          return;
        }
        std::optional<uint32_t> c = res_.clusters->Lookup(token->form);
        Emit(t, slot, c.has_value() ? kNumReservedIds + *c : kUnknownId);
        return;
      }
      case Extractor::kTag: {
        if (token->tag.empty()) {
          Emit(t, slot, kUnknownId);
          return;
        }
        Emit(t, slot, StringId(t, token->tag));
        return;
      }
      default:
        throw ConfigError("extractor not applicable to a word position");
    }
  }

 private:
  const TemplateSet& set_;
  const ExtractionResources& res_;
  FeatureVector* out_;
  std::vector<uint32_t> next_slot_;
};

void CheckVocabBound(const TemplateSet& set, const FeatureVector& fv) {
  for (const FeatureHit& h : fv.hits) {
    const FeatureGroup& g = set.groups[h.group];
    if (g.vocab_size != 0 && h.id >= g.vocab_size) {
      throw ConfigError("feature id " + std::to_string(h.id) +
                        " out of range for group '" + g.name + "' (vocab " +
                        std::to_string(g.vocab_size) + ")");
    }
  }
}

}  // namespace

FeatureVector ApplyTemplates(const TemplateSet& set, const DocumentContext& ctx,
                             const ExtractionResources& res) {
  FeatureVector fv;
  Emitter emit(set, res, &fv);
  for (const FeatureTemplate& t : set.templates) {
    for (const Position& p : t.positions) {
      uint32_t slot = emit.ClaimSlot(t);
      if (p.kind != Position::Kind::kDocument ||
          t.extractor != Extractor::kCharNgram) {
        throw ConfigError("document context supports char-ngram at 'doc' only");
      }
      // Multiset semantics at document level: every occurrence is a hit.
      std::vector<std::string> grams = CharNgrams(ctx.text, t.ngram_order);
      if (grams.empty()) {
        if (set.groups[t.group].pooling == Pooling::kConcat) {
          emit.Emit(t, slot, kUnknownId);
        }
        continue;
      }
      for (const std::string& gram : grams) {
        emit.Emit(t, slot, emit.StringId(t, gram));
      }
    }
  }
  CheckVocabBound(set, fv);
  return fv;
}

FeatureVector ApplyTemplates(const TemplateSet& set,
                             const TokenWindowContext& ctx,
                             const ExtractionResources& res) {
  FeatureVector fv;
  Emitter emit(set, res, &fv);
  for (const FeatureTemplate& t : set.templates) {
    for (const Position& p : t.positions) {
      uint32_t slot = emit.ClaimSlot(t);
      if (p.kind != Position::Kind::kTokenOffset) {
        throw ConfigError("token context requires token-offset positions");
      }
      int64_t idx = static_cast<int64_t>(ctx.focus) + p.index;
      const Token* token =
          (idx >= 0 && idx < static_cast<int64_t>(ctx.tokens.size()))
              ? &ctx.tokens[static_cast<size_t>(idx)]
              : nullptr;
      emit.EmitWord(t, slot, token);
    }
  }
  CheckVocabBound(set, fv);
  return fv;
}

FeatureVector ApplyTemplates(const TemplateSet& set, const SegContext& ctx,
                             const ExtractionResources& res) {
  const SegState& state = *ctx.state;
  const int64_t n = static_cast<int64_t>(ctx.chars.size());
  FeatureVector fv;
  Emitter emit(set, res, &fv);
  for (const FeatureTemplate& t : set.templates) {
    for (const Position& p : t.positions) {
      uint32_t slot = emit.ClaimSlot(t);
      switch (t.extractor) {
        case Extractor::kCharNgram: {
          int64_t anchor;
          if (p.kind == Position::Kind::kSegStack) {
            if (state.word_starts.empty()) {
              emit.Emit(t, slot, kPadId);
              continue;
            }
            anchor = state.word_starts.back();
          } else if (p.kind == Position::Kind::kSegBuffer) {
            if (state.BufferEmpty()) {
              emit.Emit(t, slot, kPadId);
              continue;
            }
            anchor = state.next;
          } else {
            throw ConfigError("segmentation char-ngram needs stack:/buffer: positions");
          }
          int64_t start = anchor + p.index;
          int64_t end = start + t.ngram_order;
          if (start < 0 || end > n) {
            emit.Emit(t, slot, kPadId);
            continue;
          }
          std::string gram;
          for (int64_t k = start; k < end; ++k) gram += ctx.chars[static_cast<size_t>(k)];
          emit.Emit(t, slot, emit.StringId(t, gram));
          continue;
        }
        case Extractor::kLength: {
          if (p.kind != Position::Kind::kState) {
            throw ConfigError("length feature uses the 'state' position");
          }
          if (state.word_starts.empty() || state.BufferEmpty()) {
            emit.Emit(t, slot, kPadId);
            continue;
          }
          // Distance between stack top and buffer front, clipped; the
          // clipped value doubles as the feature id.
          uint32_t gap = state.next - state.word_starts.back();
          emit.Emit(t, slot, std::min<uint32_t>(gap, static_cast<uint32_t>(t.length_clip)));
          continue;
        }
        default:
          throw ConfigError("extractor not applicable to segmentation states");
      }
    }
  }
  CheckVocabBound(set, fv);
  return fv;
}

FeatureVector ApplyTemplates(const TemplateSet& set, const SpanContext& ctx,
                             const ExtractionResources& res) {
  const SpanState& state = *ctx.state;
  FeatureVector fv;
  Emitter emit(set, res, &fv);

  auto resolve_span = [&](const Position& p) -> const Span* {
    if (p.kind == Position::Kind::kSpanStack) {
      if (static_cast<size_t>(p.index) >= state.stack.size()) return nullptr;
      return &state.stack[state.stack.size() - 1 - static_cast<size_t>(p.index)];
    }
    if (static_cast<size_t>(p.index) >= state.buffer.size()) return nullptr;
    return &state.buffer[static_cast<size_t>(p.index)];
  };
  auto resolve_word = [&](const Position& p) -> const Token* {
    const Span* span = resolve_span(p);
    if (span == nullptr) return nullptr;
    const std::vector<uint32_t>& w = span->words;
    int64_t idx = -1;
    switch (p.word) {
      case Position::WordSel::kFirst:
        idx = 0;
        break;
      case Position::WordSel::kSecond:
        idx = w.size() >= 2 ? 1 : -1;
        break;
      case Position::WordSel::kLast:
        idx = static_cast<int64_t>(w.size()) - 1;
        break;
      case Position::WordSel::kLastMinus1:
        idx = static_cast<int64_t>(w.size()) - 2;
        break;
      case Position::WordSel::kNone:
        return nullptr;
    }
    if (idx < 0) return nullptr;
    int64_t tok = static_cast<int64_t>(w[static_cast<size_t>(idx)]) + p.window;
    if (tok < 0 || tok >= static_cast<int64_t>(ctx.tokens.size())) return nullptr;
    return &ctx.tokens[static_cast<size_t>(tok)];
  };

  for (const FeatureTemplate& t : set.templates) {
    for (const Position& p : t.positions) {
      uint32_t slot = emit.ClaimSlot(t);
      if (p.kind != Position::Kind::kSpanStack &&
          p.kind != Position::Kind::kSpanBuffer) {
        throw ConfigError("span context requires span positions");
      }
      if (t.extractor == Extractor::kHasSwapped) {
        const Span* span = resolve_span(p);
        if (span == nullptr) {
          emit.Emit(t, slot, kPadId);
        } else {
          emit.Emit(t, slot, kNumReservedIds + (span->has_swapped ? 1 : 0));
        }
        continue;
      }
      emit.EmitWord(t, slot, resolve_word(p));
    }
  }
  CheckVocabBound(set, fv);
  return fv;
}

}  // namespace sffnn
