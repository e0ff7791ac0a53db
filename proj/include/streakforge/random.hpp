#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace streakforge {

/// Seeded generator whose output is identical on every platform.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// Distributions are implemented here on raw engine output instead of using
/// <random> distributions, whose algorithms are implementation-defined:
///   - uniform_index: rejection sampling on the top of the 64-bit range
///   - uniform01: 53 high bits scaled to [0, 1)
///   - normal: Marsaglia polar method (uses only log and sqrt)
///   - poisson: Knuth multiplication for small means, rounded normal above 60
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }
  double normal(double mean, double sd);
  std::uint32_t poisson(double mean);

  /// Fisher-Yates shuffle, last element first.
  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for a named slot ("sampling", "fitting", ...) and an item index
/// (author position, restart number) under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view slot, std::uint64_t index = 0);

}  // namespace streakforge
