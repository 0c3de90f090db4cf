#pragma once

#include <cstdint>
#include <vector>

namespace bandsis {

// Counter-based pseudo-random generator built on the SplitMix64 finalizer.
//
// Outputs are a pure function of (seed, stream_id, counter), so the i-th draw
// of stream k is reproducible regardless of how work is scheduled across
// threads. Every Monte Carlo routine in this library derives one stream per
// sample index, which is what makes results byte-identical for any worker
// count.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  CounterRng() = default;
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // SplitMix64 output mixing function (Steele, Lea & Flood's constants).
  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  // Derives an independent substream from a 64-bit seed and a stream id.
  static CounterRng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return CounterRng(mix64(seed + kGolden) ^ mix64(stream_id * kGolden + 1));
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound); bound >= 1. Used for desk-scale index
  // choices where the ~2^-53 float bias is irrelevant.
  std::uint64_t next_below(std::uint64_t bound) {
    std::uint64_t v = static_cast<std::uint64_t>(next_double() *
                                                 static_cast<double>(bound));
    return v >= bound ? bound - 1 : v;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Walks a discrete CDF: returns the first index k with u < sum(p[0..k]).
// Callers supply probabilities in a fixed canonical order (state-index order)
// so that sampling is deterministic given the uniform variate.
inline int pick_from_cdf(double u, const std::vector<double>& probs) {
  double cum = 0.0;
  int last = static_cast<int>(probs.size()) - 1;
  for (int k = 0; k <= last; ++k) {
    cum += probs[static_cast<std::size_t>(k)];
    if (u < cum) return k;
  }
  return last;  // guard against rounding at the top of the CDF
}

}  // namespace bandsis
