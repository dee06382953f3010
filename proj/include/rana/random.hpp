#pragma once

// Portable seeded randomness. The standard distributions are not specified
// bit-for-bit across library implementations, so everything that feeds an
// output byte goes through the helpers below instead.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace rana {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent child seed for a named stream of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xD1B54A32D192ED03ull + 1));
}

constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform in [0, 1) keyed by (seed, a, b).
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return to_unit(splitmix64(splitmix64(seed ^ splitmix64(a)) + 0x632BE59BD9B4E019ull * (b + 1)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return to_unit(engine_()); }

  /// Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (spare_) {
      spare_ = false;
      return cached_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * std::numbers::pi * u2);
    spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  /// k distinct values from [0, n) in draw order.
  std::vector<std::uint64_t> sample(std::uint64_t n, std::uint64_t k) {
    std::vector<std::uint64_t> pool(n);
    for (std::uint64_t i = 0; i < n; ++i) pool[i] = i;
    for (std::uint64_t i = 0; i < k && i < n; ++i) {
      std::swap(pool[i], pool[i + index(n - i)]);
    }
    pool.resize(k < n ? k : n);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool spare_ = false;
};

}  // namespace rana
