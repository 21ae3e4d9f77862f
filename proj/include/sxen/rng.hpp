#pragma once

#include <cstdint>
#include <span>

namespace sxen {

/// 64-bit finalizer (splitmix64). Good avalanche, cheap, stateless.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

/// Counter-based random generator: output i is a pure function of
/// (key, i), so streams can be split, replayed, and advanced in O(1).
/// Parallel consumers derive child keys with split() and stay independent
/// of each other's draw counts.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed)) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(hash_combine(mix64(seed), stream)) {}

  CounterRng split(std::uint64_t tag) const { return CounterRng(FromKey{}, hash_combine(key_, tag)); }

  std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }
  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

  /// Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform in [0, bound).
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

  /// Standard normal draws via Box-Muller; deterministic across platforms
  /// (std::normal_distribution is not).
  void fill_gaussian(std::span<double> out);

  std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  CounterRng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sxen
