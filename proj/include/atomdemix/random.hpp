// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace atomdemix {

/// splitmix64 finalizer; used to turn (master seed, index) pairs into
/// independent per-trial seeds without touching global RNG state.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0) noexcept {
    return mix64(mix64(master ^ mix64(stream + 0x632BE59BD9B4E019ULL)) + index);
}

/// Named sub-streams so that, e.g., the supports and the modulator of one
/// trial never share a generator.
namespace stream {
inline constexpr std::uint64_t kSupports1 = 1;
inline constexpr std::uint64_t kSupports2 = 2;
inline constexpr std::uint64_t kAmplitudes1 = 3;
inline constexpr std::uint64_t kAmplitudes2 = 4;
inline constexpr std::uint64_t kModulator = 5;
inline constexpr std::uint64_t kNoise = 6;
inline constexpr std::uint64_t kSigns = 7;
inline constexpr std::uint64_t kTrial = 8;
}  // namespace stream

}  // namespace atomdemix
