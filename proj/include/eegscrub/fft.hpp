#pragma once

#include "eegscrub/signal.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace eegscrub {

using cplx = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 transform; n must be a power of two.
inline void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx w = std::polar(1.0, ang * static_cast<double>(k));
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

}  // namespace detail

// Forward DFT of arbitrary length (Bluestein chirp-z for non powers of two).
inline std::vector<cplx> fft(std::vector<cplx> a) {
  const std::size_t n = a.size();
  if (n <= 1) return a;
  if (detail::is_pow2(n)) {
    detail::fft_pow2(a, false);
    return a;
  }
  const std::size_t m = detail::next_pow2(2 * n - 1);
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for long inputs.
    const auto kk = static_cast<double>((k * k) % (2 * n));
    chirp[k] = std::polar(1.0, -detail::pi * kk / static_cast<double>(n));
  }
  std::vector<cplx> x(m), y(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  y[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);
  detail::fft_pow2(x, false);
  detail::fft_pow2(y, false);
  for (std::size_t i = 0; i < m; ++i) x[i] *= y[i];
  detail::fft_pow2(x, true);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  return a;
}

inline std::vector<cplx> fft_real(std::span<const double> x) {
  return fft(std::vector<cplx>(x.begin(), x.end()));
}

// Frequency (Hz) of the largest one-sided DFT bin after mean removal.
// Returns 0 for a constant input.
inline double dominant_frequency(std::span<const double> x, double fs) {
  const double m = detail::mean(x);
  std::vector<cplx> buf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i] - m;
  buf = fft(std::move(buf));
  std::size_t best = 0;
  double best_mag = 0.0;
  for (std::size_t k = 0; k <= x.size() / 2; ++k) {
    const double mag = std::norm(buf[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  return static_cast<double>(best) * fs / static_cast<double>(x.size());
}

}  // namespace eegscrub
