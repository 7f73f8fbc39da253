#pragma once

#include <span>
#include <string>
#include <vector>

namespace sffnn {

// Micro-averaged F1 over documents; with one label per document this
// equals accuracy, but it is computed from the per-class counts.
double MicroF1(std::span<const std::string> gold,
               std::span<const std::string> predicted);

// Correct tokens / total tokens over aligned tagged sentences.
double TokenAccuracy(const std::vector<std::vector<std::string>>& gold,
                     const std::vector<std::vector<std::string>>& predicted);

// Word F1 on exact span matches, micro-aggregated over lines. Both sides
// of each line must concatenate to the same character sequence.
double SegmentationWordF1(
    const std::vector<std::vector<std::string>>& gold,
    const std::vector<std::vector<std::string>>& predicted);

}  // namespace sffnn
