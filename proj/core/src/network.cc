#include "sffnn/network.h"

#include <algorithm>
#include <cmath>

#include "sffnn/errors.h"

namespace sffnn {

EmbeddingMatrix EmbeddingMatrix::Zero(uint32_t rows, uint32_t cols) {
  EmbeddingMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.dense_.assign(static_cast<size_t>(rows) * cols, 0.f);
  return m;
}

EmbeddingMatrix EmbeddingMatrix::FromDense(std::vector<float> values,
                                           uint32_t rows, uint32_t cols) {
  if (values.size() != static_cast<size_t>(rows) * cols) {
    throw InternalError("embedding matrix: shape mismatch");
  }
  EmbeddingMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.dense_ = std::move(values);
  return m;
}

EmbeddingMatrix EmbeddingMatrix::FromQuantized(QuantizedMatrix q) {
  EmbeddingMatrix m;
  m.rows_ = q.rows;
  m.cols_ = q.dim;
  m.quantized_ = true;
  m.q_ = std::move(q);
  return m;
}

void EmbeddingMatrix::AddRowTo(uint32_t id, std::span<double> acc,
                               double weight) const {
  if (id >= rows_) {
    throw InternalError("embedding lookup id " + std::to_string(id) +
                        " out of range (rows " + std::to_string(rows_) + ")");
  }
  const size_t base = static_cast<size_t>(id) * cols_;
  if (!quantized_) {
    for (uint32_t j = 0; j < cols_; ++j) {
      acc[j] += weight * dense_[base + j];
    }
    return;
  }
  const double scale = q_.scales[id];
  for (uint32_t j = 0; j < cols_; ++j) {
    acc[j] += weight * ((static_cast<int>(q_.codes[base + j]) - kQuantBias) *
                        scale);
  }
}

std::vector<float>& EmbeddingMatrix::dense() {
  if (quantized_) throw InternalError("dense access to a quantized matrix");
  return dense_;
}

const std::vector<float>& EmbeddingMatrix::dense() const {
  if (quantized_) throw InternalError("dense access to a quantized matrix");
  return dense_;
}

const QuantizedMatrix& EmbeddingMatrix::quantized_data() const {
  if (!quantized_) throw InternalError("quantized access to a dense matrix");
  return q_;
}

EmbeddingMatrix EmbeddingMatrix::Quantize() const {
  if (quantized_) return *this;
  return FromQuantized(QuantizeMatrix(dense_, rows_, cols_));
}

uint32_t NetworkModel::ComputeH0(std::span<const FeatureGroup> groups,
                                 std::span<const uint32_t> slots) {
  uint32_t h0 = 0;
  for (size_t g = 0; g < groups.size(); ++g) {
    uint32_t width = groups[g].pooling == Pooling::kConcat ? slots[g] : 1;
    h0 += width * groups[g].embedding_dim;
  }
  return h0;
}

std::vector<uint32_t> NetworkModel::GroupOffsets() const {
  std::vector<uint32_t> offsets(groups.size());
  uint32_t off = 0;
  for (size_t g = 0; g < groups.size(); ++g) {
    offsets[g] = off;
    uint32_t width = groups[g].pooling == Pooling::kConcat ? slots[g] : 1;
    off += width * groups[g].embedding_dim;
  }
  return offsets;
}

namespace {

// Portable uniform init: 53 random bits -> [0, 1), affine to [-r, r].
class UniformInit {
 public:
  explicit UniformInit(uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}

  float Next(double radius) {
    state_ = state_ * 6364136223846793005ull + 1442695040888963407ull;
    uint64_t mixed = state_;
    mixed ^= mixed >> 33;
    mixed *= 0xff51afd7ed558ccdull;
    mixed ^= mixed >> 33;
    double unit = static_cast<double>(mixed >> 11) * 0x1.0p-53;
    return static_cast<float>((2.0 * unit - 1.0) * radius);
  }

 private:
  uint64_t state_;
};

}  // namespace

void NetworkModel::InitParameters(uint64_t seed) {
  UniformInit rng(seed);
  for (size_t g = 0; g < groups.size(); ++g) {
    double r = std::sqrt(6.0 / (1.0 + groups[g].embedding_dim));
    for (float& v : embeddings[g].dense()) v = rng.Next(r);
  }
  double r_hidden = std::sqrt(6.0 / (h0_dim + hidden_dim));
  for (float& v : hidden_weights) v = rng.Next(r_hidden);
  std::fill(hidden_bias.begin(), hidden_bias.end(), 0.f);
  double r_out = std::sqrt(6.0 / (hidden_dim + num_labels()));
  for (float& v : output_weights) v = rng.Next(r_out);
  std::fill(output_bias.begin(), output_bias.end(), 0.f);
}

void NetworkModel::QuantizeEmbeddings() {
  for (EmbeddingMatrix& m : embeddings) m = m.Quantize();
}

uint64_t NetworkModel::ParameterCount() const {
  uint64_t count = 0;
  for (const EmbeddingMatrix& m : embeddings) {
    count += static_cast<uint64_t>(m.rows()) * m.cols();
  }
  count += hidden_weights.size() + hidden_bias.size();
  count += output_weights.size() + output_bias.size();
  return count;
}

void Embed(const FeatureVector& fv, const NetworkModel& model,
           std::span<float> h0_out) {
  if (h0_out.size() != model.h0_dim) {
    throw InternalError("embed: h0 size mismatch");
  }
  const std::vector<uint32_t> offsets = model.GroupOffsets();

  // Hits that share a (group, slot) cell are averaged, as are all hits of
  // an average-pooled group; count first, then accumulate.
  const size_t ngroups = model.groups.size();
  std::vector<std::vector<uint32_t>> counts(ngroups);
  for (size_t g = 0; g < ngroups; ++g) {
    uint32_t width =
        model.groups[g].pooling == Pooling::kConcat ? model.slots[g] : 1;
    counts[g].assign(width, 0);
  }
  for (const FeatureHit& h : fv.hits) {
    if (h.group >= ngroups) throw InternalError("embed: bad group index");
    uint32_t cell = model.groups[h.group].pooling == Pooling::kConcat ? h.slot : 0;
    if (cell >= counts[h.group].size()) {
      throw InternalError("embed: slot out of range");
    }
    counts[h.group][cell] += 1;
  }

  std::vector<double> acc(model.h0_dim, 0.0);
  for (const FeatureHit& h : fv.hits) {
    const FeatureGroup& g = model.groups[h.group];
    uint32_t cell = g.pooling == Pooling::kConcat ? h.slot : 0;
    double weight = 1.0;
    if (g.pooling != Pooling::kSum) {
      weight = 1.0 / counts[h.group][cell];
    }
    size_t base = offsets[h.group] + static_cast<size_t>(cell) * g.embedding_dim;
    model.embeddings[h.group].AddRowTo(
        h.id, std::span<double>(acc).subspan(base, g.embedding_dim), weight);
  }
  for (size_t j = 0; j < acc.size(); ++j) {
    h0_out[j] = static_cast<float>(acc[j]);
  }
}

std::vector<float> Softmax(std::span<const float> logits) {
  std::vector<float> probs(logits.size());
  float max_logit = *std::max_element(logits.begin(), logits.end());
  double total = 0;
  for (size_t k = 0; k < logits.size(); ++k) {
    double e = std::exp(static_cast<double>(logits[k]) - max_logit);
    probs[k] = static_cast<float>(e);
    total += e;
  }
  for (float& p : probs) p = static_cast<float>(p / total);
  return probs;
}

ForwardResult Forward(const FeatureVector& fv, const NetworkModel& model) {
  ForwardResult r;
  r.h0.resize(model.h0_dim);
  Embed(fv, model, r.h0);

  const uint32_t m = model.hidden_dim;
  const uint32_t h0 = model.h0_dim;
  r.h1.resize(m);
  for (uint32_t i = 0; i < m; ++i) {
    double acc = model.hidden_bias[i];
    const float* w = &model.hidden_weights[static_cast<size_t>(i) * h0];
    for (uint32_t j = 0; j < h0; ++j) acc += static_cast<double>(w[j]) * r.h0[j];
    r.h1[i] = acc > 0 ? static_cast<float>(acc) : 0.f;
  }

  const uint32_t k = model.num_labels();
  r.logits.resize(k);
  for (uint32_t y = 0; y < k; ++y) {
    double acc = model.output_bias[y];
    const float* w = &model.output_weights[static_cast<size_t>(y) * m];
    for (uint32_t i = 0; i < m; ++i) acc += static_cast<double>(w[i]) * r.h1[i];
    r.logits[y] = static_cast<float>(acc);
  }
  r.probs = Softmax(r.logits);
  return r;
}

std::pair<uint32_t, float> Predict(const FeatureVector& fv,
                                   const NetworkModel& model) {
  ForwardResult r = Forward(fv, model);
  uint32_t best = 0;
  for (uint32_t y = 1; y < r.probs.size(); ++y) {
    if (r.probs[y] > r.probs[best]) best = y;
  }
  return {best, r.probs[best]};
}

}  // namespace sffnn
