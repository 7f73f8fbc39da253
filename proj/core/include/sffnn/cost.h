#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sffnn/model_io.h"

namespace sffnn {

// Exact model cost reporting. Sizes come from actually serializing the
// model, so the report always equals the file length byte for byte. FLOPs
// count the two matrix products of one forward pass (a P x Q by Q matvec
// costs P*(2Q-1)), excluding non-linearities and the softmax normalization
// but including the final-layer logits.
struct CostReport {
  uint64_t file_bytes = 0;       // full serialized length
  uint64_t component_bytes = 0;  // parameters + resources only
  std::vector<std::pair<std::string, uint64_t>> components;

  uint64_t flops = 0;  // per inference (per timestep for structured tasks)
  uint64_t hidden_flops = 0;
  uint64_t output_flops = 0;

  double file_kb() const { return static_cast<double>(file_bytes) / 1024.0; }
  double component_kb() const {
    return static_cast<double>(component_bytes) / 1024.0;
  }
};

uint64_t MatVecFlops(uint64_t rows, uint64_t cols);  // rows * (2*cols - 1)

// M*(2*H0 - 1) + K*(2*M - 1)
uint64_t FlopsPerInference(const NetworkModel& model);

// Conservative lower bound for the 4-layer byte-to-span LSTM baseline:
// four layers, eight 320x320 products each, one timestep.
uint64_t BtsReferenceFlops();

CostReport AnalyzeModel(const ModelFile& model);

// Pipeline view: component-wise sum of the parts' reports (e.g. a
// preorderer plus the tagger it consumes).
CostReport CombineReports(const std::vector<CostReport>& parts);

std::string CostReportTsv(const CostReport& report);
std::string CostReportSummary(const CostReport& report);

}  // namespace sffnn
