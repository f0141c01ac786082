#pragma once

#include <cmath>
#include <cstdint>

namespace artsep {

// SplitMix64 generator. Substreams are keyed by (seed, stream index) so that
// independent draws (mixer chunks, per-utterance synthesis) can be generated
// in any order, or concurrently, with identical results.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t stream_index) {
    // Scramble seed and stream separately so that nearby (seed, index)
    // pairs yield unrelated sequences.
    return Rng(scramble(seed) ^ scramble(stream_index * 0x9E3779B97F4A7C15ULL + 1));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
  static std::uint64_t scramble(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
    z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ULL;
    return z ^ (z >> 33);
  }

  std::uint64_t state_;
};

}  // namespace artsep
