#pragma once

#include <cstdint>
#include <random>

namespace sae {

// splitmix64; used to derive well-separated seeds for independent substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator for stream `index` of a run keyed by `seed`.
// Results depend only on (seed, index), never on scheduling order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = splitmix64(splitmix64(seed) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  return std::mt19937_64(s);
}

}  // namespace sae
