#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gtrans {

/// Seedable, splittable generator. Every stochastic routine takes an Rng&;
/// independent streams are derived with split() so that replicates and
/// grid cells reproduce bit-for-bit regardless of scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : key_(mix(seed)), engine_(key_) {}

  /// Child stream keyed on (this stream's key, id). Does not advance *this.
  Rng split(std::uint64_t id) const { return Rng(key_, id); }

  std::uint64_t operator()() { return engine_(); }
  static constexpr std::uint64_t min() { return std::mt19937_64::min(); }
  static constexpr std::uint64_t max() { return std::mt19937_64::max(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n); rejection keeps it unbiased.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) std::swap(first[i - 1], first[below(i)]);
  }

 private:
  Rng(std::uint64_t parent_key, std::uint64_t id)
      : key_(mix(parent_key ^ mix(id + 0x9e3779b97f4a7c15ULL))), engine_(key_) {}

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace gtrans
