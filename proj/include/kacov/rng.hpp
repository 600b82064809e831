#pragma once

#include <cstdint>
#include <random>

namespace kacov {

// Seeded generator over std::mt19937_64. The engine and its seed_seq
// initialization are fully specified by the standard, and every
// distribution below is written out here rather than taken from <random>,
// so a (seed, stream) pair yields the same draws on every platform.
//
// Normals use the Marsaglia polar method; the second variate of each
// accepted pair is cached and returned by the next call.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();                               // (0, 1), 53-bit resolution
  double uniform(double lo, double hi);
  std::uint64_t uniform_index(std::uint64_t bound);  // [0, bound), unbiased
  double normal();
  double chi_square(int dof);                     // sum of dof squared normals
  double student_t3();                            // Z / sqrt(W/3), W ~ chi2(3)
  double rademacher();                            // +-1 with probability 1/2

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Rng rng_stream(std::uint64_t seed, std::uint64_t stream_id) { return Rng(seed, stream_id); }

// Seed for an independent family of streams derived from (seed, index),
// e.g. the permutation streams of simulation replicate `index`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace kacov
