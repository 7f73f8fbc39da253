#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sffnn {

enum class TaskKind : uint8_t {
  kLangId = 0,
  kPos = 1,
  kSegment = 2,
  kPreorder = 3,
};

std::string TaskName(TaskKind task);
TaskKind ParseTask(std::string_view name);

enum class PreorderMode : uint8_t {
  kVanilla = 0,
  kWithPos = 1,   // run a tagger first, extract features over its tags
  kInlined = 2,   // import the tagger's input features directly
};

std::string PreorderModeName(PreorderMode mode);
PreorderMode ParsePreorderMode(std::string_view name);

}  // namespace sffnn
