#pragma once

#include <cstdint>

namespace photodur {

/// Counter-based uniform stream: draw n depends only on (seed, n), so any
/// partition of the index range across workers yields the same samples.
class CounterStream {
 public:
  explicit constexpr CounterStream(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Uniform double in the open interval (0, 1).
  constexpr double uniform(std::uint64_t index) const noexcept {
    const std::uint64_t bits = mix(key_ + 0x9e3779b97f4a7c15ULL * (index + 1));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace photodur
