#pragma once

// Deterministic random number machinery.
//
// The generator is xoshiro256++ (Blackman & Vigna, public domain), seeded
// through the splitmix64 finalizer. Both algorithms are fixed here so that
// a seed produces the same draw sequence on every platform and build.
//
// Seed derivation for parallel work is two applications of the splitmix64
// step-and-mix: replicate_seed(master, stream, index) feeds
// master -> stream -> index through the same mixer, so every (stream,
// replicate) pair gets a statistically independent generator without any
// cross-thread coordination.

#include <array>
#include <cstdint>
#include <limits>

namespace gwmd {

namespace detail {

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ull;

/// splitmix64 finalizer (Vigna / Stafford mix13).
inline constexpr std::uint64_t splitmix_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// One splitmix64 step: advances the state and returns the mixed output.
inline constexpr std::uint64_t splitmix_next(std::uint64_t& state) {
  state += kSplitMixGamma;
  return splitmix_mix(state);
}

inline constexpr std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256++ engine; satisfies std::uniform_random_bit_generator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix_next(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as an argument to log().
  double uniform01_open0() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  std::array<std::uint64_t, 4> state_;
};

/// Seed for replicate `index` of logical stream `stream` under `master`.
inline constexpr std::uint64_t replicate_seed(std::uint64_t master,
                                              std::uint64_t stream,
                                              std::uint64_t index) {
  const std::uint64_t s = detail::splitmix_mix(master + detail::kSplitMixGamma * (stream + 1));
  return detail::splitmix_mix(s + detail::kSplitMixGamma * (index + 1));
}

/// Generator for one Monte Carlo replicate.
inline Rng replicate_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return Rng(replicate_seed(master, stream, index));
}

}  // namespace gwmd
