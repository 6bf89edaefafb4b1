#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fastrl::core {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

inline uint64_t fnv1a64_bytes(const void* data, std::size_t len, uint64_t seed = kFnvOffset) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t seed = kFnvOffset) {
  return fnv1a64_bytes(s.data(), s.size(), seed);
}

inline uint64_t fnv1a64(const std::vector<double>& v, uint64_t seed = kFnvOffset) {
  return fnv1a64_bytes(v.data(), v.size() * sizeof(double), seed);
}

std::string hash_hex(uint64_t h);

// FNV-1a over a whole file's bytes. Throws IoFailure if unreadable.
uint64_t hash_file(const std::string& path);

}  // namespace fastrl::core
