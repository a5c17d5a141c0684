#pragma once

#include <cstdint>

namespace psofed {

// splitmix64-style mixer for deriving independent substream seeds from a
// master seed. Every component that needs randomness gets its own derived
// seed so that streams never interleave and runs stay reproducible.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

}  // namespace psofed
