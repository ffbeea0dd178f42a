#pragma once

#include <cstdint>
#include <string_view>

#include "biocom/rng.hpp"

namespace biocom {

/// Seeded 64-bit string hash: FNV-1a over the bytes, starting from
/// offset_basis ^ mix64(seed), then a splitmix64 finalizer.
constexpr std::uint64_t hash64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

}  // namespace biocom
