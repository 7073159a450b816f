#pragma once

#include <cstdint>
#include <random>

namespace liftsim::rng {

// splitmix64 mixing step. Used to key substreams only, never as the sampling
// engine itself.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Substream key for (seed, stream). Reproducible runs derive one engine per
// unit of independent work (replicate, event, realization, repetition) so that
// results do not depend on scheduling or worker count.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(0x9e3779b97f4a7c15ull + stream));
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive(derive(seed, a), b);
}

inline std::mt19937_64 engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline std::mt19937_64 engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(derive(seed, stream));
}

}  // namespace liftsim::rng
