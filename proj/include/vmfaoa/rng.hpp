#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace vmfaoa {

using Rng = std::mt19937_64;

namespace detail {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Derives an independent stream seed from a base seed and a path of
// integers. Streams with different paths are decorrelated, so consumers
// can be added or reordered without disturbing each other.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = detail::mix64(base);
  for (std::uint64_t k : path) h = detail::mix64(h ^ detail::mix64(k));
  return h;
}

// FNV-1a, used to fold string labels into seed paths.
inline std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace vmfaoa
