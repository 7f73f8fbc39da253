#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sffnn/config.h"
#include "sffnn/metrics.h"
#include "sffnn/model_io.h"
#include "sffnn/textio.h"
#include "sffnn/train.h"
#include "sffnn/transition.h"

namespace sffnn {

// Markup spans (everything between '<' and '>' inclusive) are removed,
// then every non-alphabetic character. If that leaves nothing the markup
// removal is skipped; if the text is still empty the original is returned.
std::string LangIdPreprocess(std::string_view text);

struct TrainedTask {
  ModelFile model;
  std::vector<TrainLogRow> log;
  double best_dev_metric = 0;
  uint64_t best_dev_step = 0;
  std::vector<GridCellResult> grid_cells;  // empty unless grid search ran
  size_t grid_best_cell = 0;
};

// ---------------------------------------------------------------------------
// Decoding helpers shared by the pipelines and the training dev evaluators.

std::pair<std::string, float> ClassifyDoc(const NetworkModel& net,
                                          const TemplateSet& templates,
                                          const ExtractionResources& res,
                                          std::string_view raw_doc);

std::vector<std::string> TagSentence(const NetworkModel& net,
                                     const TemplateSet& templates,
                                     const ExtractionResources& res,
                                     const std::vector<Token>& sentence);

// Greedy transition decoding; the returned words concatenate to the input
// characters exactly.
std::vector<std::string> SegmentChars(const NetworkModel& net,
                                      const TemplateSet& templates,
                                      const ExtractionResources& res,
                                      const std::vector<std::string>& chars,
                                      std::vector<SegAction>* derivation = nullptr);

std::vector<uint32_t> PreorderTokens(const NetworkModel& net,
                                     const TemplateSet& templates,
                                     const ExtractionResources& res,
                                     const std::vector<Token>& tokens,
                                     std::vector<PreAction>* derivation = nullptr);

// ---------------------------------------------------------------------------
// Task pipelines over a loaded model. All of them are immutable after
// construction and safe to share across threads.

class LangIdPipeline {
 public:
  explicit LangIdPipeline(const ModelFile* model);

  std::pair<std::string, float> Classify(std::string_view doc) const;

  static TrainedTask Train(const TaskConfig& config,
                           const std::vector<LabeledDoc>& train_docs,
                           const std::vector<LabeledDoc>& dev_docs,
                           bool grid_search = false);

 private:
  const ModelFile* model_;
  TemplateSet templates_;
  ExtractionResources res_;
};

class PosPipeline {
 public:
  explicit PosPipeline(const ModelFile* model);

  std::vector<std::string> Tag(const std::vector<Token>& sentence) const;

  // `clusters` may be empty (vanilla model) or a built Bloom map that gets
  // embedded into the trained artifact.
  static TrainedTask Train(const TaskConfig& config,
                           const std::vector<Sentence>& train_sents,
                           const std::vector<Sentence>& dev_sents,
                           std::optional<BloomMap> clusters = std::nullopt,
                           bool grid_search = false);

 private:
  const ModelFile* model_;
  TemplateSet templates_;
  ExtractionResources res_;
};

class SegmenterPipeline {
 public:
  explicit SegmenterPipeline(const ModelFile* model);

  std::vector<std::string> Segment(std::string_view text) const;

  static TrainedTask Train(const TaskConfig& config,
                           const std::vector<std::vector<std::string>>& train_lines,
                           const std::vector<std::vector<std::string>>& dev_lines,
                           bool grid_search = false);

 private:
  const ModelFile* model_;
  TemplateSet templates_;
  ExtractionResources res_;
};

class PreorderPipeline {
 public:
  // `tagger` is required in with-pos mode and ignored otherwise.
  PreorderPipeline(const ModelFile* model, const ModelFile* tagger);

  std::vector<uint32_t> Preorder(const std::vector<std::string>& tokens,
                                 std::vector<PreAction>* derivation = nullptr) const;

  static TrainedTask Train(const TaskConfig& config,
                           const std::vector<PreorderExample>& train_data,
                           const std::vector<PreorderExample>& dev_data,
                           const ModelFile* tagger = nullptr,
                           PreOracleStrategy oracle = PreOracleStrategy::kEagerAppend,
                           bool grid_search = false);

 private:
  std::vector<Token> PrepareTokens(const std::vector<std::string>& tokens) const;

  const ModelFile* model_;
  const ModelFile* tagger_;
  std::optional<PosPipeline> tagger_pipeline_;
  TemplateSet templates_;
  ExtractionResources res_;
};

// Parses the template set embedded in a model and reconciles it with the
// trained group table (resolved vocabularies, slot counts).
TemplateSet TemplatesForModel(const ModelFile& model);

std::vector<std::string> SegActionLabels();
std::vector<std::string> PreActionLabels();

}  // namespace sffnn
