#pragma once

#include <cstdint>
#include <random>

namespace tonsim {

// All randomness goes through std::mt19937_64, whose output sequence is fixed
// by the C++ standard (the 10000th draw from a default-seeded engine is
// 9981545732273789042). The standard <random> distributions are
// implementation-defined, so the samplers below are written out explicitly to
// keep results identical across compilers and library versions.

/// SplitMix64 finalizer. Used for seed derivation only.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-run seed: splitmix64(base_seed ^ splitmix64(run_index)).
constexpr std::uint64_t derive_run_seed(std::uint64_t base_seed, std::uint64_t run_index) noexcept {
  return splitmix64(base_seed ^ splitmix64(run_index));
}

/// Independent sub-streams of one run. Keeping them separate means the graph
/// and the arrival process do not depend on what the network does.
enum class Stream : std::uint64_t {
  Graph = 0x67726170680000ULL,
  Arrivals = 0x6172726976616cULL,
  Routing = 0x726f757465ULL,
  Faults = 0x6661756c74ULL,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t run_seed, Stream stream)
      : engine_(splitmix64(run_seed ^ static_cast<std::uint64_t>(stream))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). n must be > 0. Lemire's multiply-shift with rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<u128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Exponential with the given mean (inverse CDF). Always > 0.
  double exponential_mean(double mean);

  /// Bernoulli(p).
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tonsim
