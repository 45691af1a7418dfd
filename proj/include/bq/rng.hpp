#pragma once

#include <cmath>
#include <cstdint>

namespace bq {

/// Counter-based uniform stream: draw n of stream s under seed k is a pure
/// function of (k, s, n), so one stream's consumption never shifts another's.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ull))) {}

  /// Uniform in (0, 1).
  double uniform() noexcept {
    const std::uint64_t bits = mix(key_ + 0xD1B54A32D192ED03ull * ++counter_);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate by inversion.
  double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t position() const noexcept { return counter_; }

 private:
  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bq
