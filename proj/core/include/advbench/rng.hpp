#pragma once

#include <cstdint>
#include <vector>

namespace advbench {

// Deterministic 64-bit PRNG (splitmix64). Every stochastic component of the
// toolkit draws from one of these so that a single seed pins an entire run,
// bit for bit, across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return finalize(state_);
  }

  // Uniform double in [0, 1), 53 mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). Lemire's multiply-shift reduction; n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // One Box-Muller draw. The paired value is discarded so that the mapping
  // from the underlying u64 stream to normal variates stays stateless.
  double normal(double mean, double stddev);

  // Independent child stream. Forking with distinct indices from the same
  // parent yields streams that never need coordination, which is how the
  // harness hands deterministic randomness to parallelizable work items.
  SplitMix64 fork(std::uint64_t stream) const {
    return SplitMix64(finalize(state_ ^ (0xD1B54A32D192ED03ULL * (stream + 1))));
  }

  std::vector<std::size_t> permutation(std::size_t n);

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace advbench
