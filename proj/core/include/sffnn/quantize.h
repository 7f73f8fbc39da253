#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sffnn {

// 8-bit row-wise quantization. Each row i of an embedding matrix stores a
// scale s_i = max_j|e_ij| / (b-1) with bias b = 128 and codes
// q_ij = floor(1/2 + e_ij/s_i + b), so a code occupies one byte and
// dequantizes to (q_ij - b) * s_i.
constexpr int kQuantBias = 128;

struct QuantizedRow {
  float scale = 0.f;
  std::vector<uint8_t> codes;
};

// On-disk/in-memory payload: rows stored contiguously, each row as
// [scale: float32][dim codes: u8]. Payload size is rows*(4 + dim) bytes.
struct QuantizedMatrix {
  uint32_t rows = 0;
  uint32_t dim = 0;
  std::vector<float> scales;   // rows
  std::vector<uint8_t> codes;  // rows * dim

  uint64_t PayloadBytes() const {
    return static_cast<uint64_t>(rows) * dim + 4ull * rows;
  }
};

// All inputs must be finite. An all-zero row gets scale 0 and codes 128.
QuantizedRow QuantizeRow(std::span<const float> row);

std::vector<float> Dequantize(const QuantizedRow& row);

// Writes (codes[j] - 128) * scale into out.
void DequantizeInto(float scale, std::span<const uint8_t> codes,
                    std::span<float> out);

QuantizedMatrix QuantizeMatrix(std::span<const float> values, uint32_t rows,
                               uint32_t dim);

std::vector<float> DequantizeMatrix(const QuantizedMatrix& m);

}  // namespace sffnn
