#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sffnn {

// Approximate word -> small-integer store in ~1.23*(E + H) bits per entry,
// where H is the value width in bits and epsilon = 2^-E the false-hit rate
// on absent keys. Keys present at build time always return their exact
// value; absent keys return an arbitrary value with probability 2^-E
// (always, when E = 0).
//
// Construction: each key selects one cell in each of three equal segments
// of a cell array sized ceil(1.23*n); cells are (H + E) bits wide. Cell
// contents are solved by hypergraph peeling so that the XOR of a key's
// three cells equals its payload (value plus E fingerprint bits). Peeling
// at a 1.23 load factor succeeds with high probability; on failure the
// build retries with an incremented salt, growing the array slightly after
// repeated failures.
class BloomMap {
 public:
  BloomMap() = default;

  struct BuildOptions {
    uint32_t value_bits = 8;  // H: width of stored values
    uint32_t error_bits = 0;  // E: fingerprint bits checked on lookup
    uint64_t seed = 0x5F1D;   // base of the salt sequence
  };

  // Duplicate (key, value) pairs are collapsed; the same key with two
  // different values is a DataError.
  static BloomMap Build(const std::vector<std::pair<std::string, uint32_t>>& pairs,
                        const BuildOptions& options);
  static BloomMap Build(const std::vector<std::pair<std::string, uint32_t>>& pairs) {
    return Build(pairs, BuildOptions{});
  }

  std::optional<uint32_t> Lookup(std::string_view key) const;

  uint64_t entry_count() const { return entry_count_; }
  uint32_t value_bits() const { return value_bits_; }
  uint32_t error_bits() const { return error_bits_; }
  uint64_t cell_count() const { return cell_count_; }

  std::string Serialize() const;
  static BloomMap Deserialize(std::string_view bytes);

  uint64_t SerializedBytes() const;

 private:
  uint32_t value_bits_ = 8;
  uint32_t error_bits_ = 0;
  uint64_t salt_ = 0;
  uint64_t entry_count_ = 0;
  uint64_t cell_count_ = 0;
  std::vector<uint8_t> bits_;  // cell_count_ cells, (H+E) bits each, packed

  uint32_t CellWidth() const { return value_bits_ + error_bits_; }
  uint64_t GetCell(uint64_t index) const;
  void SetCell(uint64_t index, uint64_t value);
  void CellIndexes(std::string_view key, uint64_t out[3]) const;
  uint64_t Fingerprint(std::string_view key) const;
};

// ceil(1.23 * (E + H) * entries): the bit budget the structure is sized to.
uint64_t BloomMapSizeInBits(uint64_t entries, double value_entropy_bits,
                            double error_bits);

}  // namespace sffnn
