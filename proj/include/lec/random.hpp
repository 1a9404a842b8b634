#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lec {

using Rng = std::mt19937_64;

/// Mixes a base seed with stream tags (member index, epoch, batch, ...) into an
/// independent seed. SplitMix64 finalizer applied once per tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (std::uint64_t t : tags) h = mix(h ^ mix(t + 0x632be59bd9b4e019ULL));
  return h;
}

// Uniform double in [0,1) from the top 53 bits.
inline double canonical(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace lec
