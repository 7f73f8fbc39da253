#include "sffnn/quantize.h"

#include <cmath>

#include "sffnn/errors.h"

namespace sffnn {

QuantizedRow QuantizeRow(std::span<const float> row) {
  float max_abs = 0.f;
  for (float v : row) {
    if (!std::isfinite(v)) {
      throw InternalError("quantize: non-finite value in embedding row");
    }
    max_abs = std::max(max_abs, std::fabs(v));
  }
  QuantizedRow out;
  out.codes.resize(row.size());
  if (max_abs == 0.f) {
    out.scale = 0.f;
    for (auto& c : out.codes) c = kQuantBias;
    return out;
  }
  out.scale = max_abs / (kQuantBias - 1);
  for (size_t j = 0; j < row.size(); ++j) {
    double q = std::floor(0.5 + static_cast<double>(row[j]) / out.scale +
                          kQuantBias);
    // The exact formula can land a hair above 255 at +max|e|; clamp.
    if (q < 0) q = 0;
    if (q > 255) q = 255;
    out.codes[j] = static_cast<uint8_t>(q);
  }
  return out;
}

std::vector<float> Dequantize(const QuantizedRow& row) {
  std::vector<float> out(row.codes.size());
  DequantizeInto(row.scale, row.codes, out);
  return out;
}

void DequantizeInto(float scale, std::span<const uint8_t> codes,
                    std::span<float> out) {
  for (size_t j = 0; j < codes.size(); ++j) {
    out[j] = (static_cast<int>(codes[j]) - kQuantBias) * scale;
  }
}

QuantizedMatrix QuantizeMatrix(std::span<const float> values, uint32_t rows,
                               uint32_t dim) {
  if (values.size() != static_cast<size_t>(rows) * dim) {
    throw InternalError("quantize: matrix shape mismatch");
  }
  QuantizedMatrix m;
  m.rows = rows;
  m.dim = dim;
  m.scales.resize(rows);
  m.codes.resize(static_cast<size_t>(rows) * dim);
  for (uint32_t i = 0; i < rows; ++i) {
    QuantizedRow r = QuantizeRow(values.subspan(static_cast<size_t>(i) * dim, dim));
    m.scales[i] = r.scale;
    std::copy(r.codes.begin(), r.codes.end(),
              m.codes.begin() + static_cast<size_t>(i) * dim);
  }
  return m;
}

std::vector<float> DequantizeMatrix(const QuantizedMatrix& m) {
  std::vector<float> out(static_cast<size_t>(m.rows) * m.dim);
  for (uint32_t i = 0; i < m.rows; ++i) {
    DequantizeInto(m.scales[i],
                   std::span<const uint8_t>(m.codes).subspan(
                       static_cast<size_t>(i) * m.dim, m.dim),
                   std::span<float>(out).subspan(
                       static_cast<size_t>(i) * m.dim, m.dim));
  }
  return out;
}

}  // namespace sffnn
