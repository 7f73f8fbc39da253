#include "sffnn/bloom_map.h"

#include <cmath>
#include <unordered_map>

#include "sffnn/bytes.h"
#include "sffnn/errors.h"
#include "sffnn/hashing.h"

namespace sffnn {
namespace {

constexpr char kMagic[4] = {'S', 'B', 'L', 'M'};
constexpr uint32_t kFormatVersion = 1;
constexpr int kSaltsPerSize = 16;
constexpr int kMaxAttempts = 64;

uint64_t InitialCells(uint64_t entries) {
  uint64_t cells = static_cast<uint64_t>(std::ceil(1.23 * static_cast<double>(entries)));
  return std::max<uint64_t>(cells, 3);
}

}  // namespace

uint64_t BloomMapSizeInBits(uint64_t entries, double value_entropy_bits,
                            double error_bits) {
  if (entries == 0) return 0;
  return static_cast<uint64_t>(
      std::ceil(1.23 * (error_bits + value_entropy_bits) *
                static_cast<double>(entries)));
}

uint64_t BloomMap::GetCell(uint64_t index) const {
  const uint32_t w = CellWidth();
  uint64_t bit = index * w;
  uint64_t value = 0;
  for (uint32_t k = 0; k < w; ++k, ++bit) {
    value |= static_cast<uint64_t>((bits_[bit >> 3] >> (bit & 7)) & 1) << k;
  }
  return value;
}

void BloomMap::SetCell(uint64_t index, uint64_t value) {
  const uint32_t w = CellWidth();
  uint64_t bit = index * w;
  for (uint32_t k = 0; k < w; ++k, ++bit) {
    uint8_t mask = static_cast<uint8_t>(1u << (bit & 7));
    if ((value >> k) & 1) {
      bits_[bit >> 3] |= mask;
    } else {
      bits_[bit >> 3] &= static_cast<uint8_t>(~mask);
    }
  }
}

void BloomMap::CellIndexes(std::string_view key, uint64_t out[3]) const {
  const uint64_t h = SeededHash64(key, salt_);
  const uint64_t seg = cell_count_ / 3;
  const uint64_t rem = cell_count_ - 2 * seg;  // last segment absorbs the slack
  out[0] = FastRange32(static_cast<uint32_t>(h), static_cast<uint32_t>(seg));
  out[1] = seg + FastRange32(static_cast<uint32_t>(h >> 32),
                             static_cast<uint32_t>(seg));
  out[2] = 2 * seg + FastRange32(static_cast<uint32_t>(Mix64(h)),
                                 static_cast<uint32_t>(rem));
}

uint64_t BloomMap::Fingerprint(std::string_view key) const {
  if (error_bits_ == 0) return 0;
  uint64_t mask = (error_bits_ >= 64) ? ~0ull : ((1ull << error_bits_) - 1);
  return Mix64(SeededHash64(key, salt_ ^ 0xF1C7u)) & mask;
}

BloomMap BloomMap::Build(
    const std::vector<std::pair<std::string, uint32_t>>& pairs,
    const BuildOptions& options) {
  if (options.value_bits == 0 || options.value_bits + options.error_bits > 32) {
    throw ConfigError("bloom map: cell width must be in [1, 32] bits");
  }
  // Collapse duplicates, reject conflicts.
  std::unordered_map<std::string, uint32_t> entries;
  entries.reserve(pairs.size());
  const uint64_t value_limit = 1ull << options.value_bits;
  for (const auto& [key, value] : pairs) {
    if (value >= value_limit) {
      throw DataError("bloom map: value " + std::to_string(value) +
                      " does not fit in " + std::to_string(options.value_bits) +
                      " bits (key '" + key + "')");
    }
    auto [it, inserted] = entries.emplace(key, value);
    if (!inserted && it->second != value) {
      throw DataError("bloom map: conflicting values for key '" + key + "'");
    }
  }
  // Deterministic key order regardless of map iteration order.
  std::vector<const std::pair<const std::string, uint32_t>*> items;
  items.reserve(entries.size());
  for (const auto& kv : entries) items.push_back(&kv);
  std::sort(items.begin(), items.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });

  BloomMap map;
  map.value_bits_ = options.value_bits;
  map.error_bits_ = options.error_bits;
  map.entry_count_ = items.size();

  const uint64_t n = items.size();
  uint64_t cells = InitialCells(n);
  if (n == 0) {
    map.cell_count_ = 0;
    return map;
  }

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (attempt > 0 && attempt % kSaltsPerSize == 0) {
      cells = cells + cells / 32 + 1;  // grow ~3% after a round of salts
    }
    map.cell_count_ = cells;
    map.salt_ = options.seed + static_cast<uint64_t>(attempt) * 0x9E37u;
    map.bits_.assign((cells * map.CellWidth() + 7) / 8, 0);

    // Peel: cell -> (degree, xor of incident key ids).
    std::vector<uint32_t> degree(cells, 0);
    std::vector<uint64_t> xor_keys(cells, 0);
    std::vector<uint64_t> idx(3 * n);
    for (uint64_t k = 0; k < n; ++k) {
      uint64_t* c = &idx[3 * k];
      map.CellIndexes(items[k]->first, c);
      for (int j = 0; j < 3; ++j) {
        degree[c[j]] += 1;
        xor_keys[c[j]] ^= k;
      }
    }
    std::vector<uint64_t> stack;
    stack.reserve(cells);
    for (uint64_t c = 0; c < cells; ++c) {
      if (degree[c] == 1) stack.push_back(c);
    }
    // Peeled order: (key, defining cell) pairs, assigned in reverse.
    std::vector<std::pair<uint64_t, uint64_t>> order;
    order.reserve(n);
    while (!stack.empty()) {
      uint64_t c = stack.back();
      stack.pop_back();
      if (degree[c] != 1) continue;
      uint64_t k = xor_keys[c];
      order.emplace_back(k, c);
      for (int j = 0; j < 3; ++j) {
        uint64_t cj = idx[3 * k + j];
        degree[cj] -= 1;
        xor_keys[cj] ^= k;
        if (degree[cj] == 1) stack.push_back(cj);
      }
    }
    if (order.size() != n) continue;  // peeling failed, retry with new salt

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto [k, cell] = *it;
      const std::string& key = items[k]->first;
      uint64_t payload =
          (static_cast<uint64_t>(items[k]->second) << map.error_bits_) |
          map.Fingerprint(key);
      uint64_t acc = payload;
      for (int j = 0; j < 3; ++j) {
        uint64_t cj = idx[3 * k + j];
        if (cj != cell) acc ^= map.GetCell(cj);
      }
      map.SetCell(cell, acc);
    }
    return map;
  }
  throw InternalError("bloom map: construction failed after " +
                      std::to_string(kMaxAttempts) + " attempts");
}

std::optional<uint32_t> BloomMap::Lookup(std::string_view key) const {
  if (entry_count_ == 0 || cell_count_ == 0) return std::nullopt;
  uint64_t idx[3];
  CellIndexes(key, idx);
  uint64_t payload = GetCell(idx[0]) ^ GetCell(idx[1]) ^ GetCell(idx[2]);
  if (error_bits_ > 0) {
    uint64_t mask = (1ull << error_bits_) - 1;
    if ((payload & mask) != Fingerprint(key)) return std::nullopt;
  }
  return static_cast<uint32_t>(payload >> error_bits_);
}

std::string BloomMap::Serialize() const {
  ByteWriter w;
  w.Bytes(std::string_view(kMagic, 4));
  w.U32(kFormatVersion);
  w.U8(static_cast<uint8_t>(value_bits_));
  w.U8(static_cast<uint8_t>(error_bits_));
  w.U64(salt_);
  w.U64(entry_count_);
  w.U64(cell_count_);
  w.U64(bits_.size());
  w.Bytes(std::string_view(reinterpret_cast<const char*>(bits_.data()),
                           bits_.size()));
  return w.Take();
}

BloomMap BloomMap::Deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.Bytes(4) != std::string_view(kMagic, 4)) {
    throw DataError("bloom map: bad magic");
  }
  if (r.U32() != kFormatVersion) {
    throw DataError("bloom map: unsupported version");
  }
  BloomMap map;
  map.value_bits_ = r.U8();
  map.error_bits_ = r.U8();
  map.salt_ = r.U64();
  map.entry_count_ = r.U64();
  map.cell_count_ = r.U64();
  uint64_t nbytes = r.U64();
  std::string_view payload = r.Bytes(nbytes);
  map.bits_.assign(payload.begin(), payload.end());
  return map;
}

uint64_t BloomMap::SerializedBytes() const {
  return 4 + 4 + 1 + 1 + 8 + 8 + 8 + 8 + bits_.size();
}

}  // namespace sffnn
