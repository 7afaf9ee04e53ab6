#pragma once

#include <cstdint>
#include <random>

namespace pairclust {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Independent generator for (seed, stream); distinct streams never share state.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0)
{
  return Rng(mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x51ed270b27a3cd5dULL)));
}

namespace stream {
inline constexpr std::uint64_t labels = 1;
inline constexpr std::uint64_t pairs = 2;
inline constexpr std::uint64_t measurements = 3;
inline constexpr std::uint64_t bp_init = 4;
inline constexpr std::uint64_t eigensolver = 5;
inline constexpr std::uint64_t kmeans = 6;
inline constexpr std::uint64_t training = 7;
inline constexpr std::uint64_t points = 8;
} // namespace stream

} // namespace pairclust
