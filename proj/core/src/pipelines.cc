#include "sffnn/pipelines.h"

#include <algorithm>
#include <set>

#include "sffnn/errors.h"
#include "sffnn/unicode.h"

namespace sffnn {

std::string LangIdPreprocess(std::string_view text) {
  std::vector<uint32_t> cps = DecodeUtf8(text);
  auto strip_markup = [](const std::vector<uint32_t>& in) {
    std::vector<uint32_t> out;
    size_t i = 0;
    while (i < in.size()) {
      if (in[i] == '<') {
        size_t close = i + 1;
        while (close < in.size() && in[close] != '>') ++close;
        if (close < in.size()) {
          i = close + 1;  // drop the whole <...> span
          continue;
        }
      }
      out.push_back(in[i]);
      ++i;
    }
    return out;
  };
  auto keep_letters = [](const std::vector<uint32_t>& in) {
    std::string out;
    for (uint32_t cp : in) {
      if (IsAlphabetic(cp)) out += EncodeUtf8(cp);
    }
    return out;
  };

  std::string cleaned = keep_letters(strip_markup(cps));
  if (!cleaned.empty()) return cleaned;
  cleaned = keep_letters(cps);  // retry without markup removal
  if (!cleaned.empty()) return cleaned;
  return std::string(text);
}

// ---------------------------------------------------------------------------
// Shared decoding helpers

std::pair<std::string, float> ClassifyDoc(const NetworkModel& net,
                                          const TemplateSet& templates,
                                          const ExtractionResources& res,
                                          std::string_view raw_doc) {
  DocumentContext ctx{LangIdPreprocess(raw_doc)};
  FeatureVector fv = ApplyTemplates(templates, ctx, res);
  auto [label, prob] = Predict(fv, net);
  return {net.labels[label], prob};
}

std::vector<std::string> TagSentence(const NetworkModel& net,
                                     const TemplateSet& templates,
                                     const ExtractionResources& res,
                                     const std::vector<Token>& sentence) {
  std::vector<std::string> tags;
  tags.reserve(sentence.size());
  for (size_t t = 0; t < sentence.size(); ++t) {
    TokenWindowContext ctx{sentence, static_cast<int>(t)};
    FeatureVector fv = ApplyTemplates(templates, ctx, res);
    auto [label, prob] = Predict(fv, net);
    (void)prob;
    tags.push_back(net.labels[label]);
  }
  return tags;
}

std::vector<std::string> SegmentChars(const NetworkModel& net,
                                      const TemplateSet& templates,
                                      const ExtractionResources& res,
                                      const std::vector<std::string>& chars,
                                      std::vector<SegAction>* derivation) {
  if (chars.empty()) return {};
  auto scorer = [&](const SegState& state) {
    SegContext ctx{chars, &state};
    FeatureVector fv = ApplyTemplates(templates, ctx, res);
    return Forward(fv, net).logits;
  };
  SegDecodeResult decoded = GreedyDecodeSeg(static_cast<uint32_t>(chars.size()), scorer);
  if (derivation != nullptr) *derivation = decoded.actions;

  std::vector<std::string> words;
  const std::vector<uint32_t>& starts = decoded.state.word_starts;
  for (size_t w = 0; w < starts.size(); ++w) {
    size_t end = w + 1 < starts.size() ? starts[w + 1] : chars.size();
    std::string word;
    for (size_t c = starts[w]; c < end; ++c) word += chars[c];
    words.push_back(std::move(word));
  }
  return words;
}

std::vector<uint32_t> PreorderTokens(const NetworkModel& net,
                                     const TemplateSet& templates,
                                     const ExtractionResources& res,
                                     const std::vector<Token>& tokens,
                                     std::vector<PreAction>* derivation) {
  if (tokens.empty()) return {};
  auto scorer = [&](const SpanState& state) {
    SpanContext ctx{tokens, &state};
    FeatureVector fv = ApplyTemplates(templates, ctx, res);
    return Forward(fv, net).logits;
  };
  PreDecodeResult decoded = GreedyDecodePre(static_cast<uint32_t>(tokens.size()), scorer);
  if (derivation != nullptr) *derivation = decoded.actions;
  return TerminalOrder(decoded.state);
}

// ---------------------------------------------------------------------------
// Model/template plumbing

TemplateSet TemplatesForModel(const ModelFile& model) {
  TaskConfig config = TaskConfig::Parse(model.config_text);
  TemplateSet templates = config.templates;
  if (templates.groups.size() != model.net.groups.size()) {
    throw DataError("model group table does not match its embedded config");
  }
  for (size_t g = 0; g < templates.groups.size(); ++g) {
    if (templates.groups[g].name != model.net.groups[g].name) {
      throw DataError("model group order does not match its embedded config");
    }
    // Auto vocabularies were resolved at training time.
    templates.groups[g].vocab_size = model.net.groups[g].vocab_size;
    if (templates.slots[g] != model.net.slots[g]) {
      throw DataError("model slot counts do not match its embedded config");
    }
  }
  return templates;
}

std::vector<std::string> SegActionLabels() { return {"SPLIT", "MERGE"}; }

std::vector<std::string> PreActionLabels() {
  return {"APPEND", "SHIFT", "SWAP"};
}

namespace {

ExtractionResources ResourcesFor(const ModelFile& model) {
  ExtractionResources res;
  res.lexicons = &model.lexicons;
  res.clusters = model.clusters.has_value() ? &*model.clusters : nullptr;
  return res;
}

void RequireTask(const ModelFile* model, TaskKind task) {
  if (model == nullptr) throw ConfigError("missing model");
  if (model->task != task) {
    throw ConfigError("model is a " + TaskName(model->task) +
                      " model, expected " + TaskName(task));
  }
}

// Shared trailing half of every Train(): run plain training or the grid,
// package the result.
TrainedTask RunTraining(const TaskConfig& config, ModelFile skeleton,
                        const std::vector<Example>& examples,
                        const DevEvaluator& dev_eval, bool grid_search) {
  skeleton.net.InitParameters(config.train.seed);
  TrainedTask out;
  if (grid_search) {
    if (config.grid.Empty()) {
      throw ConfigError("grid search requested but the config has no grid.* keys");
    }
    auto factory = [&]() {
      NetworkModel net = skeleton.net;
      net.InitParameters(config.train.seed);
      return net;
    };
    GridSearchResult grid =
        GridSearch(factory, examples, config.grid, config.train, dev_eval);
    out.grid_cells = grid.cells;
    out.grid_best_cell = grid.best_cell;
    out.log = grid.best.log;
    out.best_dev_metric = grid.best.best_dev_metric;
    out.best_dev_step = grid.best.best_dev_step;
    skeleton.net = std::move(grid.best.model);
  } else {
    TrainResult result =
        Train(std::move(skeleton.net), examples, config.train, dev_eval);
    out.log = result.log;
    out.best_dev_metric = result.best_dev_metric;
    out.best_dev_step = result.best_dev_step;
    skeleton.net = std::move(result.model);
  }
  out.model = std::move(skeleton);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Language identification

LangIdPipeline::LangIdPipeline(const ModelFile* model) : model_(model) {
  RequireTask(model, TaskKind::kLangId);
  templates_ = TemplatesForModel(*model);
  res_ = ResourcesFor(*model);
}

std::pair<std::string, float> LangIdPipeline::Classify(std::string_view doc) const {
  return ClassifyDoc(model_->net, templates_, res_, doc);
}

TrainedTask LangIdPipeline::Train(const TaskConfig& config,
                                  const std::vector<LabeledDoc>& train_docs,
                                  const std::vector<LabeledDoc>& dev_docs,
                                  bool grid_search) {
  if (config.task != TaskKind::kLangId) throw ConfigError("config task is not langid");
  if (train_docs.empty() || dev_docs.empty()) {
    throw DataError("langid training needs non-empty train and dev sets");
  }
  std::set<std::string> label_set;
  for (const LabeledDoc& d : train_docs) label_set.insert(d.label);
  std::vector<std::string> labels(label_set.begin(), label_set.end());

  ModelFile skeleton = BuildModelSkeleton(config, labels);
  ExtractionResources res = ResourcesFor(skeleton);
  const TemplateSet& templates = config.templates;

  auto features = [&](const std::string& text) {
    DocumentContext ctx{LangIdPreprocess(text)};
    return ApplyTemplates(templates, ctx, res);
  };
  std::vector<Example> examples;
  examples.reserve(train_docs.size());
  for (const LabeledDoc& d : train_docs) {
    auto it = label_set.find(d.label);
    uint32_t label = static_cast<uint32_t>(std::distance(label_set.begin(), it));
    examples.push_back(Example{features(d.text), label});
  }

  std::vector<std::string> dev_gold;
  for (const LabeledDoc& d : dev_docs) dev_gold.push_back(d.label);
  DevEvaluator dev_eval = [&](const NetworkModel& net) {
    std::vector<std::string> predicted;
    predicted.reserve(dev_docs.size());
    for (const LabeledDoc& d : dev_docs) {
      predicted.push_back(ClassifyDoc(net, templates, res, d.text).first);
    }
    return MicroF1(dev_gold, predicted);
  };
  return RunTraining(config, std::move(skeleton), examples, dev_eval, grid_search);
}

// ---------------------------------------------------------------------------
// POS tagging

PosPipeline::PosPipeline(const ModelFile* model) : model_(model) {
  RequireTask(model, TaskKind::kPos);
  templates_ = TemplatesForModel(*model);
  res_ = ResourcesFor(*model);
}

std::vector<std::string> PosPipeline::Tag(const std::vector<Token>& sentence) const {
  return TagSentence(model_->net, templates_, res_, sentence);
}

TrainedTask PosPipeline::Train(const TaskConfig& config,
                               const std::vector<Sentence>& train_sents,
                               const std::vector<Sentence>& dev_sents,
                               std::optional<BloomMap> clusters,
                               bool grid_search) {
  if (config.task != TaskKind::kPos) throw ConfigError("config task is not pos");
  if (train_sents.empty() || dev_sents.empty()) {
    throw DataError("pos training needs non-empty train and dev sets");
  }
  std::set<std::string> tag_set;
  for (const Sentence& s : train_sents) {
    for (const Token& t : s.tokens) {
      if (t.tag.empty()) {
        throw DataError("pos training data has tokens without a UPOS tag");
      }
      tag_set.insert(t.tag);
    }
  }
  std::vector<std::string> labels(tag_set.begin(), tag_set.end());

  ModelFile skeleton = BuildModelSkeleton(config, labels);
  skeleton.clusters = std::move(clusters);
  ExtractionResources res = ResourcesFor(skeleton);
  const TemplateSet& templates = config.templates;

  std::vector<Example> examples;
  for (const Sentence& s : train_sents) {
    for (size_t t = 0; t < s.tokens.size(); ++t) {
      TokenWindowContext ctx{s.tokens, static_cast<int>(t)};
      auto it = tag_set.find(s.tokens[t].tag);
      uint32_t label = static_cast<uint32_t>(std::distance(tag_set.begin(), it));
      examples.push_back(Example{ApplyTemplates(templates, ctx, res), label});
    }
  }

  std::vector<std::vector<std::string>> dev_gold;
  for (const Sentence& s : dev_sents) {
    std::vector<std::string> tags;
    for (const Token& t : s.tokens) tags.push_back(t.tag);
    dev_gold.push_back(std::move(tags));
  }
  DevEvaluator dev_eval = [&](const NetworkModel& net) {
    std::vector<std::vector<std::string>> predicted;
    predicted.reserve(dev_sents.size());
    for (const Sentence& s : dev_sents) {
      predicted.push_back(TagSentence(net, templates, res, s.tokens));
    }
    return TokenAccuracy(dev_gold, predicted);
  };
  return RunTraining(config, std::move(skeleton), examples, dev_eval, grid_search);
}

// ---------------------------------------------------------------------------
// Segmentation

SegmenterPipeline::SegmenterPipeline(const ModelFile* model) : model_(model) {
  RequireTask(model, TaskKind::kSegment);
  templates_ = TemplatesForModel(*model);
  res_ = ResourcesFor(*model);
}

std::vector<std::string> SegmenterPipeline::Segment(std::string_view text) const {
  std::vector<std::string> chars = SplitUtf8Chars(text);
  return SegmentChars(model_->net, templates_, res_, chars);
}

namespace {

std::vector<std::string> LineChars(const std::vector<std::string>& words) {
  std::vector<std::string> chars;
  for (const std::string& w : words) {
    std::vector<std::string> wc = SplitUtf8Chars(w);
    chars.insert(chars.end(), wc.begin(), wc.end());
  }
  return chars;
}

}  // namespace

TrainedTask SegmenterPipeline::Train(
    const TaskConfig& config,
    const std::vector<std::vector<std::string>>& train_lines,
    const std::vector<std::vector<std::string>>& dev_lines, bool grid_search) {
  if (config.task != TaskKind::kSegment) throw ConfigError("config task is not segment");
  if (train_lines.empty() || dev_lines.empty()) {
    throw DataError("segmentation training needs non-empty train and dev sets");
  }

  // Build one lexicon per non-hashed char-ngram group over the raw
  // character stream (word boundaries do not block n-grams at decode time,
  // so they do not block counting either).
  TaskConfig resolved = config;
  TemplateSet& templates = resolved.templates;
  std::map<std::string, Lexicon> lexicons;
  for (const FeatureTemplate& t : templates.templates) {
    FeatureGroup& g = templates.groups[t.group];
    if (t.extractor != Extractor::kCharNgram || g.hashed) continue;
    if (lexicons.count(g.name) != 0) continue;
    std::unordered_map<std::string, uint64_t> counts;
    for (const std::vector<std::string>& words : train_lines) {
      std::vector<std::string> chars = LineChars(words);
      if (chars.size() < static_cast<size_t>(t.ngram_order)) continue;
      for (size_t i = 0; i + t.ngram_order <= chars.size(); ++i) {
        std::string gram;
        for (int k = 0; k < t.ngram_order; ++k) gram += chars[i + k];
        counts[gram] += 1;
      }
    }
    Lexicon lexicon = Lexicon::Build(counts, config.lexicon_cutoff);
    if (g.vocab_size == 0) {
      g.vocab_size = lexicon.vocab_size();
    } else if (g.vocab_size < lexicon.vocab_size()) {
      throw ConfigError("group '" + g.name + "' vocab " +
                        std::to_string(g.vocab_size) + " is smaller than its lexicon (" +
                        std::to_string(lexicon.vocab_size()) + ")");
    }
    lexicons.emplace(g.name, std::move(lexicon));
  }

  ModelFile skeleton = BuildModelSkeleton(resolved, SegActionLabels());
  skeleton.lexicons = std::move(lexicons);
  ExtractionResources res = ResourcesFor(skeleton);

  // Unroll the static oracle into (state, action) examples.
  std::vector<Example> examples;
  for (const std::vector<std::string>& words : train_lines) {
    std::vector<std::string> chars = LineChars(words);
    std::vector<uint32_t> lengths;
    for (const std::string& w : words) {
      lengths.push_back(static_cast<uint32_t>(SplitUtf8Chars(w).size()));
    }
    std::vector<SegAction> actions = SegOracle(lengths);
    SegState state = SegState::Initial(static_cast<uint32_t>(chars.size()));
    for (SegAction a : actions) {
      SegContext ctx{chars, &state};
      examples.push_back(Example{ApplyTemplates(templates, ctx, res),
                                 static_cast<uint32_t>(a)});
      state = SegApply(state, a);
    }
  }

  DevEvaluator dev_eval = [&](const NetworkModel& net) {
    std::vector<std::vector<std::string>> predicted;
    predicted.reserve(dev_lines.size());
    for (const std::vector<std::string>& words : dev_lines) {
      predicted.push_back(SegmentChars(net, templates, res, LineChars(words)));
    }
    return SegmentationWordF1(dev_lines, predicted);
  };
  return RunTraining(resolved, std::move(skeleton), examples, dev_eval, grid_search);
}

// ---------------------------------------------------------------------------
// Preordering

PreorderPipeline::PreorderPipeline(const ModelFile* model, const ModelFile* tagger)
    : model_(model), tagger_(tagger) {
  RequireTask(model, TaskKind::kPreorder);
  if (model->preorder_mode == PreorderMode::kWithPos) {
    RequireTask(tagger, TaskKind::kPos);
    tagger_pipeline_.emplace(tagger);
  }
  templates_ = TemplatesForModel(*model);
  res_ = ResourcesFor(*model);
}

std::vector<Token> PreorderPipeline::PrepareTokens(
    const std::vector<std::string>& tokens) const {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const std::string& form : tokens) out.push_back(Token{form, ""});
  if (tagger_pipeline_.has_value()) {
    std::vector<std::string> tags = tagger_pipeline_->Tag(out);
    for (size_t i = 0; i < out.size(); ++i) out[i].tag = tags[i];
  }
  return out;
}

std::vector<uint32_t> PreorderPipeline::Preorder(
    const std::vector<std::string>& tokens,
    std::vector<PreAction>* derivation) const {
  return PreorderTokens(model_->net, templates_, res_, PrepareTokens(tokens),
                        derivation);
}

TrainedTask PreorderPipeline::Train(const TaskConfig& config,
                                    const std::vector<PreorderExample>& train_data,
                                    const std::vector<PreorderExample>& dev_data,
                                    const ModelFile* tagger,
                                    PreOracleStrategy oracle,
                                    bool grid_search) {
  if (config.task != TaskKind::kPreorder) throw ConfigError("config task is not preorder");
  if (train_data.empty() || dev_data.empty()) {
    throw DataError("preordering training needs non-empty train and dev sets");
  }
  const bool with_pos = config.preorder_mode == PreorderMode::kWithPos;
  std::optional<PosPipeline> tagger_pipeline;
  if (with_pos) {
    RequireTask(tagger, TaskKind::kPos);
    tagger_pipeline.emplace(tagger);
  }

  // Tag lexicons come from the frozen tagger's label set.
  TaskConfig resolved = config;
  std::map<std::string, Lexicon> lexicons;
  for (const FeatureTemplate& t : resolved.templates.templates) {
    FeatureGroup& g = resolved.templates.groups[t.group];
    if (t.extractor != Extractor::kTag || g.hashed) continue;
    if (!with_pos) {
      throw ConfigError("tag features need mode = with-pos and a tagger model");
    }
    if (lexicons.count(g.name) == 0) {
      lexicons.emplace(g.name, Lexicon(tagger->net.labels));
    }
    if (g.vocab_size == 0) {
      g.vocab_size = lexicons.at(g.name).vocab_size();
    }
  }

  ModelFile skeleton = BuildModelSkeleton(resolved, PreActionLabels());
  skeleton.preorder_mode = config.preorder_mode;
  skeleton.lexicons = std::move(lexicons);
  ExtractionResources res = ResourcesFor(skeleton);
  const TemplateSet& templates = resolved.templates;

  auto prepare = [&](const std::vector<std::string>& forms) {
    std::vector<Token> tokens;
    tokens.reserve(forms.size());
    for (const std::string& form : forms) tokens.push_back(Token{form, ""});
    if (tagger_pipeline.has_value()) {
      std::vector<std::string> tags = tagger_pipeline->Tag(tokens);
      for (size_t i = 0; i < tokens.size(); ++i) tokens[i].tag = tags[i];
    }
    return tokens;
  };

  std::vector<Example> examples;
  for (const PreorderExample& ex : train_data) {
    std::vector<Token> tokens = prepare(ex.tokens);
    std::vector<PreAction> actions = PreOracle(ex.target_order, oracle);
    SpanState state = SpanState::Initial(static_cast<uint32_t>(tokens.size()));
    for (PreAction a : actions) {
      SpanContext ctx{tokens, &state};
      examples.push_back(Example{ApplyTemplates(templates, ctx, res),
                                 static_cast<uint32_t>(a)});
      state = PreApply(state, a);
    }
  }

  // Dev sentences are tagged once, not per evaluation.
  std::vector<std::vector<Token>> dev_tokens;
  dev_tokens.reserve(dev_data.size());
  for (const PreorderExample& ex : dev_data) dev_tokens.push_back(prepare(ex.tokens));

  DevEvaluator dev_eval = [&](const NetworkModel& net) {
    FrsAccumulator frs;
    for (size_t i = 0; i < dev_data.size(); ++i) {
      std::vector<uint32_t> predicted =
          PreorderTokens(net, templates, res, dev_tokens[i]);
      frs.Add(predicted, dev_data[i].target_order);
    }
    return frs.Score();
  };
  return RunTraining(resolved, std::move(skeleton), examples, dev_eval, grid_search);
}

}  // namespace sffnn
