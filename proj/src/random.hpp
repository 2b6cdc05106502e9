#pragma once

#include <cstdint>
#include <random>

namespace modalnet::detail {

// Purpose tags keep the randomized procedures on independent streams of one seed.
enum class Stream : std::uint64_t {
  kInvariantProbe = 1,
  kDecentralizedGain = 2,
  kProjectionSamples = 3,
  kProtocolSearch = 4,
};

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) * 1315423911ULL + index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

}  // namespace modalnet::detail
