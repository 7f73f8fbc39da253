#pragma once

#include <string>

#include "sffnn/features.h"
#include "sffnn/model_io.h"
#include "sffnn/task.h"
#include "sffnn/train.h"

namespace sffnn {

// A task configuration file is flat text: `key = value` lines for the
// architecture and training settings, plus `group` / `template` lines
// declaring the feature templates. `#` starts a comment.
struct TaskConfig {
  TaskKind task = TaskKind::kLangId;
  PreorderMode preorder_mode = PreorderMode::kVanilla;
  uint32_t hidden_dim = 0;       // M
  uint32_t num_labels = 0;       // placeholder label count for size/flops
  uint64_t lexicon_cutoff = 2;   // frequency cutoff for auto-vocab groups
  PreOracleStrategy oracle = PreOracleStrategy::kEagerAppend;
  TemplateSet templates;
  TrainingConfig train;
  GridSpec grid;
  std::string text;  // the raw config, embedded into trained models

  static TaskConfig Parse(std::string_view text);
  static TaskConfig ParseFile(const std::string& path);

  void Validate() const;
};

// Builds an untrained model skeleton from a config: groups and slot counts
// from the template set, zeroed tensors, placeholder labels when real ones
// are not supplied. Groups with vocab=auto must be resolved (by training)
// before this is called.
ModelFile BuildModelSkeleton(const TaskConfig& config,
                             const std::vector<std::string>& labels = {});

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, std::string_view text);

}  // namespace sffnn
