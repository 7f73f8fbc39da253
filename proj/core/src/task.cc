#include "sffnn/task.h"

#include "sffnn/errors.h"

namespace sffnn {

std::string TaskName(TaskKind task) {
  switch (task) {
    case TaskKind::kLangId:
      return "langid";
    case TaskKind::kPos:
      return "pos";
    case TaskKind::kSegment:
      return "segment";
    case TaskKind::kPreorder:
      return "preorder";
  }
  return "?";
}

TaskKind ParseTask(std::string_view name) {
  if (name == "langid") return TaskKind::kLangId;
  if (name == "pos") return TaskKind::kPos;
  if (name == "segment") return TaskKind::kSegment;
  if (name == "preorder") return TaskKind::kPreorder;
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (expected langid, pos, segment or preorder)");
}

std::string PreorderModeName(PreorderMode mode) {
  switch (mode) {
    case PreorderMode::kVanilla:
      return "vanilla";
    case PreorderMode::kWithPos:
      return "with-pos";
    case PreorderMode::kInlined:
      return "inlined";
  }
  return "?";
}

PreorderMode ParsePreorderMode(std::string_view name) {
  if (name == "vanilla") return PreorderMode::kVanilla;
  if (name == "with-pos") return PreorderMode::kWithPos;
  if (name == "inlined") return PreorderMode::kInlined;
  throw ConfigError("unknown preorder mode '" + std::string(name) +
                    "' (expected vanilla, with-pos or inlined)");
}

}  // namespace sffnn
