#include "sffnn/bloom_map.h"

#include <string>
#include <vector>

#include "doctest.h"
#include "sffnn/errors.h"
#include "support/test_rng.h"

using namespace sffnn;

TEST_CASE("size formula matches the worked values") {
  CHECK(BloomMapSizeInBits(250000, 8, 0) == 2460000);  // ~300 KB
  CHECK(BloomMapSizeInBits(0, 8, 0) == 0);
  CHECK(BloomMapSizeInBits(1000, 4, 2) == 7380);
  // 9.84 bits per entry at E=0, H=8.
  CHECK(static_cast<double>(BloomMapSizeInBits(250000, 8, 0)) / 250000 ==
        doctest::Approx(9.84).epsilon(1e-9));
}

namespace {

std::vector<std::pair<std::string, uint32_t>> SyntheticPairs(size_t n,
                                                             uint64_t seed) {
  TestRng rng(seed);
  std::vector<std::pair<std::string, uint32_t>> pairs;
  pairs.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    pairs.emplace_back("word_" + std::to_string(i),
                       static_cast<uint32_t>(rng.Below(256)));
  }
  return pairs;
}

}  // namespace

TEST_CASE("every inserted key returns its exact value") {
  auto pairs = SyntheticPairs(20000, 42);
  BloomMap map = BloomMap::Build(pairs);
  for (const auto& [key, value] : pairs) {
    auto got = map.Lookup(key);
    REQUIRE(got.has_value());
    CHECK(*got == value);
  }
}

TEST_CASE("serialized size stays within 5% of the formula") {
  auto pairs = SyntheticPairs(20000, 43);
  BloomMap map = BloomMap::Build(pairs);
  double budget_bits = static_cast<double>(BloomMapSizeInBits(pairs.size(), 8, 0));
  double actual_bits = 8.0 * static_cast<double>(map.SerializedBytes());
  CHECK(actual_bits <= budget_bits * 1.05);
  CHECK(actual_bits >= budget_bits * 0.95);
}

TEST_CASE("with zero error bits absent keys still return some value") {
  auto pairs = SyntheticPairs(5000, 44);
  BloomMap map = BloomMap::Build(pairs);
  for (int i = 0; i < 1000; ++i) {
    auto got = map.Lookup("absent_" + std::to_string(i));
    REQUIRE(got.has_value());
    CHECK(*got < 256);
  }
}

TEST_CASE("error bits bound the false-hit rate on absent keys") {
  auto pairs = SyntheticPairs(5000, 45);
  BloomMap::BuildOptions options;
  options.error_bits = 3;  // epsilon = 1/8
  BloomMap map = BloomMap::Build(pairs, options);
  for (const auto& [key, value] : pairs) {            // still exact
    REQUIRE(map.Lookup(key).has_value());
    CHECK(*map.Lookup(key) == value);
  }
  int hits = 0;
  const int kProbes = 10000;
  for (int i = 0; i < kProbes; ++i) {
    if (map.Lookup("absent_" + std::to_string(i)).has_value()) ++hits;
  }
  double rate = static_cast<double>(hits) / kProbes;
  CHECK(rate <= (1.0 / 8) * 1.2);
}

TEST_CASE("empty map answers not-found") {
  BloomMap map = BloomMap::Build({});
  CHECK(!map.Lookup("anything").has_value());
  CHECK(map.entry_count() == 0);
}

TEST_CASE("conflicting duplicates are rejected, identical ones collapsed") {
  CHECK_THROWS_AS(
      BloomMap::Build({{"the", 4}, {"a", 7}, {"the", 5}}),
      DataError);
  BloomMap map = BloomMap::Build({{"the", 4}, {"the", 4}, {"a", 7}});
  CHECK(map.entry_count() == 2);
  CHECK(*map.Lookup("the") == 4);
  CHECK(*map.Lookup("a") == 7);
}

TEST_CASE("values outside the declared width are rejected") {
  BloomMap::BuildOptions options;
  options.value_bits = 8;
  CHECK_THROWS_AS(BloomMap::Build({{"w", 256}}, options), DataError);
}

TEST_CASE("serialization round-trips bit-exactly") {
  auto pairs = SyntheticPairs(3000, 46);
  BloomMap map = BloomMap::Build(pairs);
  std::string bytes = map.Serialize();
  CHECK(bytes.size() == map.SerializedBytes());
  BloomMap loaded = BloomMap::Deserialize(bytes);
  CHECK(loaded.Serialize() == bytes);
  for (const auto& [key, value] : pairs) {
    CHECK(*loaded.Lookup(key) == value);
  }
}

TEST_CASE("builds are deterministic for fixed inputs and seed") {
  auto pairs = SyntheticPairs(2000, 47);
  std::string a = BloomMap::Build(pairs).Serialize();
  std::string b = BloomMap::Build(pairs).Serialize();
  CHECK(a == b);
}

TEST_CASE("tiny maps build and answer correctly") {
  for (size_t n : {1, 2, 3, 5, 17}) {
    auto pairs = SyntheticPairs(n, 48 + n);
    BloomMap map = BloomMap::Build(pairs);
    for (const auto& [key, value] : pairs) {
      CHECK(*map.Lookup(key) == value);
    }
  }
}
