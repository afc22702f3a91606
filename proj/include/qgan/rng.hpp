#pragma once

#include <cstdint>
#include <random>

namespace qgan {

/// The single pseudo-random source used by every stochastic routine.
///
/// Engine: 64-bit Mersenne Twister (std::mt19937_64, whose output sequence is
/// fixed by the standard). Distributions are implemented here rather than
/// taken from <random>, so a given seed yields the same stream with any
/// standard library:
///   uniform()  53 high bits of one engine draw, scaled to [0, 1)
///   normal()   Marsaglia polar method, spare value cached
///   below(n)   rejection sampling on the raw 64-bit output
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent seed for sub-stream `stream` of a run seeded with `base`
/// (splitmix64 finalizer over the pair).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace qgan
