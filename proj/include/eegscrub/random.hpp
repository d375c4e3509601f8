#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace eegscrub {

// Counter-based 64-bit generator: the n-th draw of a stream is a pure function
// of (key, n), so results do not depend on platform or standard library.
// Streams are split by hashing a label into the key.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(mix(key)) {}

  CounterRng(std::uint64_t seed, std::string_view label) : key_(mix(seed ^ mix(hash(label)))) {}

  // Child stream keyed by an integer tag (epoch index, class id, ...).
  CounterRng split(std::uint64_t tag) const { return CounterRng(key_ ^ mix(tag + 0x632be59bd9b4e019ULL)); }
  CounterRng split(std::string_view label) const { return CounterRng(key_ ^ mix(hash(label))); }

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) {
    while (true) {
      const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
      const auto lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  // Standard normal via Box-Muller; one value per call, no cached state.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }

  double exponential(double rate) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(u) / rate;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace eegscrub
