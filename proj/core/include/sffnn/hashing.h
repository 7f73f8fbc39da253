#pragma once

#include <cstdint>
#include <string_view>

namespace sffnn {

// 64-bit FNV-1a over raw bytes. This is the hash behind all random feature
// mixing; it is byte-order independent and stable across platforms, so
// hashed feature ids are reproducible everywhere.
constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

constexpr uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = kFnvOffsetBasis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// splitmix64 finalizer; used to derive independent hash streams from one
// base hash (Bloom map cell indexes, fingerprints, salts).
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seeded variant for structures that need their own hash family.
constexpr uint64_t SeededHash64(std::string_view bytes, uint64_t seed) {
  return Mix64(Fnv1a64(bytes) ^ Mix64(seed));
}

// Maps a 32-bit slice onto [0, range) without modulo bias (Lemire).
constexpr uint32_t FastRange32(uint32_t x, uint32_t range) {
  return static_cast<uint32_t>((static_cast<uint64_t>(x) * range) >> 32);
}

// v = H(x) mod V. Total function: any byte string (including empty) maps
// into [0, vocab_size).
constexpr uint32_t HashFeature(std::string_view raw, uint32_t vocab_size) {
  return static_cast<uint32_t>(Fnv1a64(raw) % vocab_size);
}

}  // namespace sffnn
