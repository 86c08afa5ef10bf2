#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace pnr {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: output i is mix64(key + i * golden). A stream is
/// identified by (seed, stream, shard), so any shard can be regenerated
/// independently of how work is spread over threads.
///
/// Distribution sampling is done here rather than with <random> distributions,
/// whose algorithms differ between standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t shard) noexcept
      : key_(mix64(mix64(seed ^ 0x6A09E667F3BCC909ULL) ^ mix64(stream + 0x3C6EF372FE94F82BULL) ^
                   mix64(shard * 0x9E3779B97F4A7C15ULL + 0xA54FF53A5F1D36F1ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() noexcept { return 1.0 - uniform(); }

  /// Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n) noexcept {
    return static_cast<std::uint32_t>((((*this)() >> 32) * static_cast<std::uint64_t>(n)) >> 32);
  }

  double exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

  /// Standard normal (Box-Muller, cosine branch only so the draw count per
  /// sample is fixed).
  double normal() noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  /// Poisson by sequential inversion; large means are split into chunks.
  std::uint32_t poisson(double mean) noexcept {
    std::uint32_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint32_t poisson_small(double mean) noexcept {
    if (mean <= 0.0) return 0;
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform();
    std::uint32_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / k;
      cdf += p;
    }
    return k;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pnr
