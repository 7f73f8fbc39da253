#include "sffnn/hashing.h"

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "support/test_rng.h"

using namespace sffnn;

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(Fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(Fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(Fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("hash_feature with vocab 1 maps everything to 0") {
  CHECK(HashFeature("", 1) == 0);
  CHECK(HashFeature("ab", 1) == 0);
  CHECK(HashFeature("anything at all", 1) == 0);
}

TEST_CASE("hash_feature is a pure function of its bytes") {
  uint32_t first = HashFeature("ab", 5000);
  for (int i = 0; i < 3; ++i) {
    std::string key = "ab";
    CHECK(HashFeature(key, 5000) == first);
  }
  CHECK(first < 5000);
}

TEST_CASE("hashing 10k random trigrams into 100 buckets is uniform") {
  TestRng rng(0xBADC0DE);
  constexpr int kSamples = 10000;
  constexpr uint32_t kBuckets = 100;
  std::vector<int> counts(kBuckets, 0);
  std::set<std::string> seen;
  int produced = 0;
  while (produced < kSamples) {
    std::string gram = rng.AsciiWord(3, 3);
    if (!seen.insert(gram).second) continue;  // distinct trigrams
    counts[HashFeature(gram, kBuckets)] += 1;
    ++produced;
  }
  // Per-bucket counts within 4 sigma of the expectation.
  const double expected = static_cast<double>(kSamples) / kBuckets;
  const double sigma = std::sqrt(kSamples * (1.0 / kBuckets) * (1.0 - 1.0 / kBuckets));
  for (uint32_t b = 0; b < kBuckets; ++b) {
    CHECK(std::fabs(counts[b] - expected) <= 4 * sigma);
  }
  // Chi-square over the same sample: df = 99, mean 99, sd sqrt(198);
  // 99 + 4*sqrt(198) ~ 155.3.
  double chi2 = 0;
  for (uint32_t b = 0; b < kBuckets; ++b) {
    double d = counts[b] - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 155.3);
}

TEST_CASE("seeded hashes differ across seeds but not across calls") {
  CHECK(SeededHash64("word", 1) == SeededHash64("word", 1));
  CHECK(SeededHash64("word", 1) != SeededHash64("word", 2));
}
