#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sffnn/features.h"
#include "sffnn/quantize.h"

namespace sffnn {

// Embedding storage: float32 rows, or 8-bit quantized rows dequantized on
// the fly at lookup.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  static EmbeddingMatrix Zero(uint32_t rows, uint32_t cols);
  static EmbeddingMatrix FromDense(std::vector<float> values, uint32_t rows,
                                   uint32_t cols);
  static EmbeddingMatrix FromQuantized(QuantizedMatrix q);

  uint32_t rows() const { return rows_; }
  uint32_t cols() const { return cols_; }
  bool quantized() const { return quantized_; }

  // acc[j] += weight * row(id)[j]
  void AddRowTo(uint32_t id, std::span<double> acc, double weight) const;

  std::vector<float>& dense();
  const std::vector<float>& dense() const;
  const QuantizedMatrix& quantized_data() const;

  EmbeddingMatrix Quantize() const;

  uint64_t PayloadBytes() const {
    return quantized_ ? q_.PayloadBytes()
                      : 4ull * rows_ * cols_;
  }

 private:
  uint32_t rows_ = 0;
  uint32_t cols_ = 0;
  bool quantized_ = false;
  std::vector<float> dense_;
  QuantizedMatrix q_;
};

// The four-layer model: embedding lookup with pooling, concatenation into
// h0, one ReLU hidden layer of M units, softmax over the labels.
struct NetworkModel {
  std::vector<FeatureGroup> groups;
  std::vector<uint32_t> slots;  // per group, 1 for average/sum
  std::vector<EmbeddingMatrix> embeddings;

  uint32_t hidden_dim = 0;  // M
  uint32_t h0_dim = 0;      // H0
  std::vector<float> hidden_weights;  // M x H0, row-major
  std::vector<float> hidden_bias;     // M
  std::vector<float> output_weights;  // K x M, row-major
  std::vector<float> output_bias;     // K
  std::vector<std::string> labels;

  uint32_t num_labels() const { return static_cast<uint32_t>(labels.size()); }

  // h0 layout: groups in declared order; concat groups contribute
  // slots*dim values, average/sum groups dim values.
  static uint32_t ComputeH0(std::span<const FeatureGroup> groups,
                            std::span<const uint32_t> slots);
  std::vector<uint32_t> GroupOffsets() const;

  // Uniform random init in +-sqrt(6/(fan_in+fan_out)) from a portable
  // 64-bit generator so trained artifacts are reproducible bit for bit.
  void InitParameters(uint64_t seed);

  void QuantizeEmbeddings();
  uint64_t ParameterCount() const;
};

void Embed(const FeatureVector& fv, const NetworkModel& model,
           std::span<float> h0_out);

struct ForwardResult {
  std::vector<float> h0;
  std::vector<float> h1;
  std::vector<float> logits;
  std::vector<float> probs;
};

ForwardResult Forward(const FeatureVector& fv, const NetworkModel& model);

// Probabilities from logits with max-subtraction.
std::vector<float> Softmax(std::span<const float> logits);

// argmax of Forward with ties broken toward the lower label index.
std::pair<uint32_t, float> Predict(const FeatureVector& fv,
                                   const NetworkModel& model);

}  // namespace sffnn
