#pragma once

#include "pspin/common.hpp"

#include <cstdint>

namespace pspin {

// Small counter-style generator (splitmix64). Every stochastic routine in the
// library derives one stream per logical work unit (sample index, tree node,
// tensor, ...) from a user seed, so results are reproducible bit for bit for
// a fixed seed regardless of evaluation order or worker count.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  using result_type = std::uint64_t;
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ull; }

  std::uint64_t operator()() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // strictly inside (0,1); safe as a log() argument
  double next_double() { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }
};

inline std::uint64_t mix64(std::uint64_t x) {
  SplitMix64 g(x);
  return g();
}

// Derives an independent stream id from a seed and up to three tags.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dull);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

inline double sample_normal(SplitMix64& g) {
  const double u1 = g.next_double();
  const double u2 = g.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double sample_exponential(SplitMix64& g) { return -std::log(g.next_double()); }

// Box-Muller over Eigen arrays; one normal consumes exactly two uniforms so
// streams stay aligned when a buffer is regenerated with a larger size.
inline void fill_normal(Eigen::Ref<ArrayXd> out, SplitMix64& g) {
  const Eigen::Index n = out.size();
  ArrayXd u1(n), u2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u1[i] = g.next_double();
    u2[i] = g.next_double();
  }
  out = (-2.0 * u1.log()).sqrt() * (2.0 * M_PI * u2).cos();
}

inline void fill_exponential(Eigen::Ref<ArrayXd> out, SplitMix64& g) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = g.next_double();
  out = -out.log();
}

}  // namespace pspin
