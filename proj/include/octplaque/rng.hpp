#pragma once

#include <cmath>
#include <cstdint>

namespace octplaque {

/// Counter-based pseudo-random stream. The k-th draw is a pure function of
/// (seed, k), so a stream can be replayed, serialized as two integers, or
/// split into independent child streams without shared state.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  float next_float() { return static_cast<float>(next_double()); }

  /// Uniform double in [lo, hi].
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, n). Requires n > 0.
  std::int64_t next_int(std::int64_t n) {
    return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    return lo + next_int(hi - lo + 1);
  }

  bool next_bool() { return (next_u64() & 1u) != 0; }

  /// Standard normal via Box-Muller. Consumes two draws per call so the
  /// stream stays a pure function of its counter (no cached spare).
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958648 * u2);
  }

  /// Derive an independent stream keyed by `key` (e.g. a worker or frame id).
  RngStream split(std::uint64_t key) const {
    return RngStream(mix64(seed_ ^ mix64(key + 0x632BE59BD9B4E019ull)));
  }

  /// Fisher-Yates shuffle of a random-access container.
  template <typename Container>
  void shuffle(Container& c) {
    for (std::int64_t i = static_cast<std::int64_t>(c.size()) - 1; i > 0; --i) {
      std::int64_t j = next_int(i + 1);
      using std::swap;
      swap(c[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(j)]);
    }
  }

 private:
  // SplitMix64 finalizer.
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace octplaque
