#pragma once

// Counter-based random streams.
//
// Every block of every trajectory gets its own generator, keyed by
// (seed, stream, height). Draws at a given absolute height therefore never
// depend on how many blocks were skipped or on which thread ran the trajectory.
// The generator is SplitMix64; the README documents the exact derivation.

#include <cstdint>

namespace feemarket {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finaliser applied to `x + golden gamma`.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t block_key(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t height) noexcept {
  return mix64(mix64(mix64(seed) ^ stream) ^ height);
}

class RngStream {
 public:
  constexpr explicit RngStream(std::uint64_t state) noexcept : state_(state) {}

  static constexpr RngStream for_block(std::uint64_t seed, std::uint64_t stream,
                                       std::uint64_t height) noexcept {
    return RngStream(block_key(seed, stream, height));
  }

  constexpr std::uint64_t next() noexcept {
    const std::uint64_t out = mix64(state_);
    state_ += kGoldenGamma;
    return out;
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a logarithm argument.
  constexpr double uniform_open0() noexcept {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace feemarket
