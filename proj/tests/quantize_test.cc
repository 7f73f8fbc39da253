#include "sffnn/quantize.h"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "sffnn/errors.h"
#include "support/test_rng.h"

using namespace sffnn;

TEST_CASE("scale and codes follow the rounding formula") {
  // max|e| = 1.27 -> s = 0.01; an entry of 0.5 lands on code 178.
  std::vector<float> row = {1.27f, 0.5f, -0.25f, 0.f};
  QuantizedRow q = QuantizeRow(row);
  CHECK(q.scale == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(q.codes[1] == 178);
  CHECK(q.codes[3] == 128);  // zero -> bias
}

TEST_CASE("all-zero rows quantize to scale 0 and codes 128") {
  std::vector<float> row(16, 0.f);
  QuantizedRow q = QuantizeRow(row);
  CHECK(q.scale == 0.f);
  for (uint8_t c : q.codes) CHECK(c == 128);
  std::vector<float> back = Dequantize(q);
  for (float v : back) CHECK(v == 0.f);
}

TEST_CASE("extreme entries land on codes 255 and 1") {
  std::vector<float> row = {0.75f, -0.75f, 0.1f};
  QuantizedRow q = QuantizeRow(row);
  CHECK(q.codes[0] == 255);  // floor(0.5 + 127 + 128)
  CHECK(q.codes[1] == 1);    // floor(0.5 - 127 + 128)
}

TEST_CASE("dequantize inverts the worked example") {
  QuantizedRow q;
  q.scale = 0.01f;
  q.codes = {178};
  std::vector<float> back = Dequantize(q);
  CHECK(back[0] == doctest::Approx(0.50).epsilon(1e-6));
}

TEST_CASE("non-finite input is rejected") {
  std::vector<float> row = {1.f, std::numeric_limits<float>::infinity()};
  CHECK_THROWS_AS(QuantizeRow(row), InternalError);
  std::vector<float> nan_row = {std::nanf("")};
  CHECK_THROWS_AS(QuantizeRow(nan_row), InternalError);
}

TEST_CASE("round-trip error is bounded by s/2 and re-quantization is exact") {
  TestRng rng(0x51CA1E);
  for (int trial = 0; trial < 2000; ++trial) {
    int dim = 1 + static_cast<int>(rng.Below(32));
    std::vector<float> row(dim);
    double magnitude = std::pow(10.0, rng.Range(-3, 3));
    for (float& v : row) v = static_cast<float>(rng.Range(-magnitude, magnitude));
    QuantizedRow q = QuantizeRow(row);
    std::vector<float> back = Dequantize(q);
    for (int j = 0; j < dim; ++j) {
      CHECK(std::fabs(back[j] - row[j]) <= q.scale / 2 * (1 + 1e-5));
    }
    QuantizedRow again = QuantizeRow(back);
    CHECK(again.scale == q.scale);
    CHECK(again.codes == q.codes);
  }
}

TEST_CASE("quantized payload is V*D + 4V bytes") {
  TestRng rng(7);
  std::vector<float> values(50 * 16);
  for (float& v : values) v = static_cast<float>(rng.Range(-1, 1));
  QuantizedMatrix m = QuantizeMatrix(values, 50, 16);
  CHECK(m.PayloadBytes() == 50ull * 16 + 4ull * 50);
  std::vector<float> back = DequantizeMatrix(m);
  CHECK(back.size() == values.size());
}
