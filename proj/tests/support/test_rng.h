#pragma once

#include <cstdint>
#include <string>

// Deterministic generator for test inputs; independent of the library's
// internals.
class TestRng {
 public:
  explicit TestRng(uint64_t seed) : state_(seed ? seed : 1) {}

  uint64_t Next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_;
  }

  uint64_t Below(uint64_t bound) { return Next() % bound; }

  double Unit() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  double Range(double lo, double hi) { return lo + (hi - lo) * Unit(); }

  std::string AsciiWord(int min_len, int max_len, char base = 'a', int span = 26) {
    int len = min_len + static_cast<int>(Below(max_len - min_len + 1));
    std::string out;
    for (int i = 0; i < len; ++i) {
      out.push_back(static_cast<char>(base + Below(span)));
    }
    return out;
  }

 private:
  uint64_t state_;
};
