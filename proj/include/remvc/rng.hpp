#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace remvc {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derive an independent generator from a master seed, a stream name and
/// up to two indices. Named streams keep unrelated consumers of randomness
/// from shifting each other when one of them is toggled off.
inline Rng substream(std::uint64_t master, std::string_view name,
                     std::uint64_t i = 0, std::uint64_t j = 0) {
  std::uint64_t s = mix64(master ^ mix64(hash_name(name)));
  s = mix64(s ^ mix64(i + 0x632be59bd9b4e019ULL));
  s = mix64(s ^ mix64(j + 0x85157af5ULL));
  return Rng(s);
}

}  // namespace remvc
