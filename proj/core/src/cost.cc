#include "sffnn/cost.h"

#include <iomanip>
#include <sstream>

namespace sffnn {

uint64_t MatVecFlops(uint64_t rows, uint64_t cols) {
  if (rows == 0 || cols == 0) return 0;
  return rows * (2 * cols - 1);
}

uint64_t FlopsPerInference(const NetworkModel& model) {
  return MatVecFlops(model.hidden_dim, model.h0_dim) +
         MatVecFlops(model.num_labels(), model.hidden_dim);
}

uint64_t BtsReferenceFlops() {
  return 4ull * 8ull * MatVecFlops(320, 320);
}

CostReport AnalyzeModel(const ModelFile& model) {
  CostReport report;
  ModelSections sections;
  std::string bytes = SerializeModel(model, &sections);
  report.file_bytes = bytes.size();

  for (const auto& [name, size] : sections.embeddings) {
    report.components.emplace_back("embeddings/" + name, size);
  }
  report.components.emplace_back("hidden", sections.hidden);
  report.components.emplace_back("output", sections.output);
  for (const auto& [name, size] : sections.resources) {
    report.components.emplace_back("resources/" + name, size);
  }
  report.component_bytes = sections.EmbeddingBytes() + sections.hidden +
                           sections.output + sections.ResourceBytes();
  report.components.emplace_back("labels", sections.labels);
  report.components.emplace_back(
      "container", sections.header + sections.config);

  report.hidden_flops = MatVecFlops(model.net.hidden_dim, model.net.h0_dim);
  report.output_flops =
      MatVecFlops(model.net.num_labels(), model.net.hidden_dim);
  report.flops = report.hidden_flops + report.output_flops;
  return report;
}

CostReport CombineReports(const std::vector<CostReport>& parts) {
  CostReport total;
  for (size_t i = 0; i < parts.size(); ++i) {
    const CostReport& p = parts[i];
    std::string prefix = "part" + std::to_string(i) + "/";
    total.file_bytes += p.file_bytes;
    total.component_bytes += p.component_bytes;
    for (const auto& [name, size] : p.components) {
      total.components.emplace_back(prefix + name, size);
    }
    total.flops += p.flops;
    total.hidden_flops += p.hidden_flops;
    total.output_flops += p.output_flops;
  }
  return total;
}

std::string CostReportTsv(const CostReport& report) {
  std::ostringstream out;
  out << "component\tbytes\n";
  for (const auto& [name, size] : report.components) {
    out << name << '\t' << size << '\n';
  }
  out << "component_sum\t" << report.component_bytes << '\n';
  out << "file_total\t" << report.file_bytes << '\n';
  out << "flops_hidden\t" << report.hidden_flops << '\n';
  out << "flops_output\t" << report.output_flops << '\n';
  out << "flops_total\t" << report.flops << '\n';
  return out.str();
}

std::string CostReportSummary(const CostReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << "size: " << report.component_kb() << " KB parameters+resources, "
      << report.file_kb() << " KB on disk ("
      << report.file_bytes << " bytes)\n";
  out << "flops/inference: " << report.flops << " (hidden "
      << report.hidden_flops << ", output " << report.output_flops << ")\n";
  return out.str();
}

}  // namespace sffnn
