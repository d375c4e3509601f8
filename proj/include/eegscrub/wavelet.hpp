#pragma once

#include "eegscrub/filter.hpp"
#include "eegscrub/signal.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace eegscrub {

// Daubechies-4 (8-tap) analysis low-pass filter.
inline constexpr std::array<double, 8> kDb4Lo = {
    -0.010597401785069032105, 0.032883011666885199735, 0.030841381835560763627, -0.18703481171909308408,
    -0.027983769416859854211, 0.63088076792985890788,  0.71484657055291564709,  0.23037781330889650086};

inline constexpr std::array<double, 8> db4_high_pass() {
  std::array<double, 8> hi{};
  for (std::size_t k = 0; k < 8; ++k) hi[k] = ((k % 2) ? 1.0 : -1.0) * kDb4Lo[7 - k];
  return hi;
}

inline constexpr std::array<double, 8> kDb4Hi = db4_high_pass();

struct WaveletDecomposition {
  std::vector<double> approx;                // coarsest approximation
  std::vector<std::vector<double>> details;  // fine -> coarse, one per level
  std::string wavelet_id = "db4";
  int levels = 0;
  std::size_t original_length = 0;
  std::vector<std::size_t> level_lengths;  // input length at each level; [0] = original_length
  double fs = 1.0;
};

// Deepest level for which every decomposed band is at least one filter long.
inline int dwt_max_level(std::size_t n) {
  const std::size_t f = kDb4Lo.size();
  int level = 0;
  while (n >= f) {
    n = (n + f - 1) / 2;
    ++level;
  }
  return level;
}

namespace detail {

// c[o] = sum_j h[j] x[2o + 1 - j] over the half-sample symmetric extension of x.
inline std::vector<double> analysis_step(const std::vector<double>& x, const std::array<double, 8>& h) {
  const std::size_t n = x.size();
  const std::size_t f = h.size();
  std::vector<double> out((n + f - 1) / 2);
  for (std::size_t o = 0; o < out.size(); ++o) {
    double s = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      s += h[j] * x[reflect_index(static_cast<std::ptrdiff_t>(2 * o + 1) - static_cast<std::ptrdiff_t>(j), n)];
    }
    out[o] = s;
  }
  return out;
}

// Adjoint of the analysis pair; exact inverse on the first n samples.
inline std::vector<double> synthesis_step(const std::vector<double>& a, const std::vector<double>& d, std::size_t n) {
  const auto f = static_cast<std::ptrdiff_t>(kDb4Lo.size());
  std::vector<double> x(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const auto mi = static_cast<std::ptrdiff_t>(m);
    // 0 <= 2o + 1 - m <= f - 1
    const std::ptrdiff_t o_lo = std::max<std::ptrdiff_t>(0, (mi - 1 + 1) / 2);
    const std::ptrdiff_t o_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(a.size()) - 1, (mi + f - 2) / 2);
    double s = 0.0;
    for (std::ptrdiff_t o = o_lo; o <= o_hi; ++o) {
      const std::ptrdiff_t j = 2 * o + 1 - mi;
      if (j < 0 || j >= f) continue;
      s += kDb4Lo[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(o)] +
           kDb4Hi[static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(o)];
    }
    x[m] = s;
  }
  return x;
}

}  // namespace detail

// Multilevel db4 DWT with symmetric extension. Works for any length; the
// per-level lengths are recorded so the inverse trims exactly.
inline WaveletDecomposition dwt_forward(const Signal& signal, int levels) {
  if (levels < 1) fail(ErrorKind::invalid_levels, "DWT needs at least one level");
  const std::size_t f = kDb4Lo.size();
  if (signal.size() < f) fail(ErrorKind::too_short, "signal shorter than the wavelet filter");
  if (levels > dwt_max_level(signal.size())) {
    fail(ErrorKind::invalid_levels, std::to_string(levels) + " levels exceed the maximum of " +
                                        std::to_string(dwt_max_level(signal.size())) + " for length " +
                                        std::to_string(signal.size()));
  }
  WaveletDecomposition dec;
  dec.levels = levels;
  dec.original_length = signal.size();
  dec.fs = signal.fs();
  std::vector<double> cur = signal.values();
  for (int l = 0; l < levels; ++l) {
    dec.level_lengths.push_back(cur.size());
    dec.details.push_back(detail::analysis_step(cur, kDb4Hi));
    cur = detail::analysis_step(cur, kDb4Lo);
  }
  dec.approx = std::move(cur);
  return dec;
}

inline Signal dwt_inverse(const WaveletDecomposition& dec) {
  if (dec.levels < 1 || dec.details.size() != static_cast<std::size_t>(dec.levels) ||
      dec.level_lengths.size() != dec.details.size()) {
    fail(ErrorKind::invalid_argument, "inconsistent wavelet decomposition");
  }
  std::vector<double> cur = dec.approx;
  for (int l = dec.levels - 1; l >= 0; --l) {
    const auto& d = dec.details[static_cast<std::size_t>(l)];
    if (d.size() != cur.size()) fail(ErrorKind::invalid_argument, "detail/approximation length mismatch");
    cur = detail::synthesis_step(cur, d, dec.level_lengths[static_cast<std::size_t>(l)]);
  }
  return Signal(std::move(cur), dec.fs);
}

}  // namespace eegscrub
