#pragma once

// Portable random streams. std::mt19937_64 and std::seed_seq are specified
// bit-exactly by the standard; the distributions in <random> are not, so
// uniform doubles, bounded integers and normals are derived here by hand.
//
// Stream splitting: stream(seed, id) seeds the engine with the 32-bit words
// (seed_lo, seed_hi, id_lo, id_hi, kVersion) through std::seed_seq. Distinct
// ids give independent streams under one user seed.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace ibl {

class Rng {
 public:
  static constexpr std::uint32_t kVersion = 1;

  static Rng stream(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                      kVersion};
    return Rng(std::mt19937_64(seq));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on (0, 1] with 53 random bits.
  double uniform01() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n) by rejection, n > 0.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  /// Two independent standard normals by the Box-Muller transform.
  std::pair<double, double> normal_pair() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  /// In-place Fisher-Yates.
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = index(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  explicit Rng(std::mt19937_64 engine) : engine_(std::move(engine)) {}
  std::mt19937_64 engine_;
};

}  // namespace ibl
