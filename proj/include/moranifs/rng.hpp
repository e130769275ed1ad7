#pragma once

#include <cstdint>

namespace moran {

// Counter-based random stream. Every draw is a pure function of
// (seed, sample index, layer index), so sampling is reproducible bit-for-bit
// regardless of thread count or evaluation order, and workers can take any
// slice of the sample range without coordination.
//
// Construction: three rounds of the SplitMix64 finalizer over the mixed
// words. This mapping is part of the released seed->stream contract; changing
// it is a breaking change.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t sample,
                         std::uint64_t layer) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (sample * 0xD1B54A32D192ED03ULL));
  h = splitmix64(h ^ (layer * 0x8CB92BA72F3D8DD7ULL));
  return h;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform(std::uint64_t seed, std::uint64_t sample,
                      std::uint64_t layer) {
  return static_cast<double>(mix(seed, sample, layer) >> 11) * 0x1.0p-53;
}

}  // namespace rng
}  // namespace moran
