#pragma once

#include <cstdint>
#include <random>

namespace tumorsynth {

using Rng = std::mt19937_64;

/// Independent seed streams. Each consumer draws from its own stream so that
/// rejected placement candidates never perturb shape or texture randomness.
enum class SeedStream : std::uint64_t {
  item = 0x1,
  spec = 0x2,
  shape = 0x3,
  texture = 0x4,
  placement = 0x5,
  study = 0x6,
  bootstrap = 0x7,
  phantom = 0x8,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Pure function of its arguments; used for random-access item seeding.
constexpr std::uint64_t derive_seed(std::uint64_t base, SeedStream stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(base ^ mix64(static_cast<std::uint64_t>(stream))) + index);
}

}  // namespace tumorsynth
