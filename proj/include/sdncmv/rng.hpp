#pragma once

#include <cmath>
#include <cstdint>

namespace sdncmv {

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that every stream
// is a pure function of (seed) on any platform, independent of the
// standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  // Independent stream addressed by (master, domain, index). Streams for
  // distinct addresses never share state, so parallel consumers can draw
  // in any order.
  static Rng stream(std::uint64_t master, std::uint64_t domain, std::uint64_t index) {
    std::uint64_t x = master;
    std::uint64_t h = splitmix64(x);
    x ^= domain * 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(x);
    x ^= index * 0xbf58476d1ce4e5b9ULL;
    h ^= splitmix64(x);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller. The second variate is discarded so
  // the stream position is a pure function of the call count.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4];
};

// Stream domains. Keeping them in one place guarantees distinct consumers
// never collide for a given master seed.
namespace rng_domain {
inline constexpr std::uint64_t subject = 1;
inline constexpr std::uint64_t graph = 2;
inline constexpr std::uint64_t base_precision = 3;
inline constexpr std::uint64_t bootstrap = 4;
inline constexpr std::uint64_t cv_folds = 5;
inline constexpr std::uint64_t replication = 6;
}  // namespace rng_domain

}  // namespace sdncmv
