#pragma once

#include <cmath>
#include <cstdint>

namespace luresid {

// Counter-based RNG built on the splitmix64 finalizer. A draw is a pure
// function of (seed, stream, counter), which makes parallel substreams and
// bit-reproducible runs trivial: substream i of a generator is independent
// of how many values other substreams consumed.
//
//   key     = mix(mix(seed) ^ mix(stream + phi))
//   draw_k  = mix(key + (k + 1) * phi),   phi = 0x9E3779B97F4A7C15
//
// Doubles are formed from the top 53 bits, uniform on [0, 1).
class CounterRng {
 public:
  CounterRng() : CounterRng(0, 0) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream) {
    key_ = mix(mix(seed) ^ mix(stream + kPhi));
    counter_ = 0;
  }

  /// Independent substream derived from this generator's seed material.
  [[nodiscard]] CounterRng substream(std::uint64_t stream) const {
    CounterRng r;
    r.key_ = mix(key_ ^ mix(stream + kPhi));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kPhi); }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % bound;
  }

  /// Standard normal via Box-Muller (consumes two uniforms).
  double next_gaussian() {
    const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  static constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z += kPhi;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates shuffle driven by a CounterRng (deterministic given the rng).
template <class RandomAccessContainer>
void shuffle(RandomAccessContainer& items, CounterRng& rng) {
  const auto size = static_cast<std::uint64_t>(items.size());
  for (std::uint64_t i = size; i > 1; --i) {
    const auto j = rng.next_below(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace luresid
