#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>

namespace fkr {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a stream key from a base seed and a list of integer coordinates
// (site coordinates, replicate index, purpose tag, ...). Order matters.
inline std::uint64_t derive_key(std::uint64_t seed,
                                std::initializer_list<std::int64_t> parts) noexcept
{
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (auto p : parts)
    h = mix64(h ^ static_cast<std::uint64_t>(p));
  return h;
}

inline std::uint64_t derive_key(std::uint64_t seed,
                                std::span<const std::int64_t> parts,
                                std::int64_t tag) noexcept
{
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(tag));
  for (auto p : parts)
    h = mix64(h ^ static_cast<std::uint64_t>(p));
  return h;
}

// Counter-based generator: the i-th output of the stream with key k is
// mix64(k + i * golden). Streams never share state, so any partition of
// work across threads reproduces the same numbers.
class CounterRng
{
public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept
  {
    return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept
  {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_pos() noexcept { return 1.0 - uniform(); }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) noexcept
  {
    // Lemire-style rejection would be exact; the modulo bias at n << 2^64 is
    // far below anything a Monte Carlo test can resolve.
    return next_u64() % n;
  }

  // Box-Muller; the second variate is cached.
  double normal() noexcept
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Standard normal conditioned on |z| <= c (rejection).
  double truncated_normal(double c) noexcept
  {
    for (;;) {
      const double z = normal();
      if (std::abs(z) <= c)
        return z;
    }
  }

  int rademacher() noexcept { return (next_u64() >> 63) ? 1 : -1; }

  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace fkr
