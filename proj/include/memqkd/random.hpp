#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace memqkd {

/// SplitMix64 generator. Cheap to seed, which matters because every memory
/// cycle gets its own stream derived from (session seed, cycle index).
/// Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Seed of cycle `index` within a session seeded with `session_seed`.
/// Independent of how cycles are sharded across workers.
inline std::uint64_t derive_seed(std::uint64_t session_seed, std::uint64_t index) noexcept {
  SplitMix64 mix(session_seed ^ (index * 0xd1b54a32d192ed03ULL));
  mix();
  return mix();
}

// Library-owned sampling helpers. The std distributions are
// implementation-defined, and reports must be byte-identical for a given seed.

/// Uniform double in [0, 1) with 53 random bits.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
bool bernoulli(Rng& rng, double p) {
  return uniform01(rng) < p;
}

/// Number of failures before the first success of a Bernoulli(p) process.
/// Returns max() when p == 0.
template <class Rng>
std::uint64_t geometric_skip(Rng& rng, double p) {
  if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  if (p >= 1.0) return 0;
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  const double k = std::floor(std::log(u) / std::log1p(-p));
  if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(k);
}

}  // namespace memqkd
