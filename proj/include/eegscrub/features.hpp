#pragma once

#include "eegscrub/error.hpp"
#include "eegscrub/fft.hpp"
#include "eegscrub/filter.hpp"
#include "eegscrub/signal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace eegscrub {

struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> feature_names;
  std::optional<std::vector<int>> labels;
  std::size_t degenerate_count = 0;  // flagged zero-filled cells (constant or silent epochs)

  std::size_t n_rows() const noexcept { return rows.size(); }
  std::size_t n_cols() const noexcept { return feature_names.size(); }

  void validate() const {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != feature_names.size()) {
        fail(ErrorKind::shape_mismatch, "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                            " values, expected " + std::to_string(feature_names.size()));
      }
      for (double v : rows[r])
        if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "non-finite feature in row " + std::to_string(r));
    }
    if (labels && labels->size() != rows.size()) fail(ErrorKind::shape_mismatch, "label count differs from row count");
  }
};

// ------------------------------------------------------------------ Welch

struct Psd {
  std::vector<double> freqs;
  std::vector<double> psd;
};

inline constexpr std::size_t kDefaultWelchSegment = 256;

// One-sided Welch density: periodic Hann window, per-segment mean removal,
// |X|^2 / (fs * sum(w^2)), doubled off DC and Nyquist. Its integral matches
// the signal variance.
inline Psd welch_psd(const Signal& signal, std::size_t seg_len = kDefaultWelchSegment, double overlap = 0.5) {
  if (seg_len < 8) fail(ErrorKind::invalid_argument, "Welch segment length must be at least 8");
  if (seg_len > signal.size()) {
    fail(ErrorKind::too_short, "Welch segment length " + std::to_string(seg_len) + " exceeds signal length " +
                                   std::to_string(signal.size()));
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) fail(ErrorKind::invalid_argument, "overlap must lie in [0, 1)");
  const std::size_t hop =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(seg_len) * (1.0 - overlap))));
  std::vector<double> w(seg_len);
  double wss = 0.0;
  for (std::size_t i = 0; i < seg_len; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * detail::pi * static_cast<double>(i) / static_cast<double>(seg_len));
    wss += w[i] * w[i];
  }
  const std::size_t nbins = seg_len / 2 + 1;
  Psd out{std::vector<double>(nbins), std::vector<double>(nbins, 0.0)};
  for (std::size_t k = 0; k < nbins; ++k) out.freqs[k] = static_cast<double>(k) * signal.fs() / static_cast<double>(seg_len);

  const auto x = signal.samples();
  std::size_t segments = 0;
  for (std::size_t start = 0; start + seg_len <= x.size(); start += hop, ++segments) {
    const auto seg = x.subspan(start, seg_len);
    const double m = detail::mean(seg);
    std::vector<cplx> buf(seg_len);
    for (std::size_t i = 0; i < seg_len; ++i) buf[i] = (seg[i] - m) * w[i];
    const auto spec = fft(std::move(buf));
    for (std::size_t k = 0; k < nbins; ++k) out.psd[k] += std::norm(spec[k]);
  }
  const double scale = 1.0 / (signal.fs() * wss * static_cast<double>(segments));
  for (std::size_t k = 0; k < nbins; ++k) {
    const bool edge = k == 0 || (seg_len % 2 == 0 && k == nbins - 1);
    out.psd[k] *= scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

// ------------------------------------------------------------------ bands

struct Band {
  const char* name;
  double lo, hi;
};

inline constexpr std::array<Band, 5> kEegBands = {{
    {"delta", 0.5, 4.0},
    {"theta", 4.0, 8.0},
    {"alpha", 8.0, 13.0},
    {"beta", 13.0, 30.0},
    {"gamma", 30.0, 45.0},
}};

namespace detail {

// Trapezoid integral of (f, p) over [lo, hi], with linear interpolation at the
// band edges so the result does not jump with the grid.
inline double integrate_band(const std::vector<double>& f, const std::vector<double>& p, double lo, double hi) {
  if (f.size() < 2) return 0.0;
  lo = std::max(lo, f.front());
  hi = std::min(hi, f.back());
  if (hi <= lo) return 0.0;
  auto interp = [&](double x) {
    const auto it = std::upper_bound(f.begin(), f.end(), x);
    const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - f.begin()), 1, f.size() - 1);
    const double t = (x - f[j - 1]) / (f[j] - f[j - 1]);
    return p[j - 1] + t * (p[j] - p[j - 1]);
  };
  double acc = 0.0;
  double px = lo, pv = interp(lo);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] <= lo) continue;
    if (f[k] >= hi) break;
    acc += 0.5 * (pv + p[k]) * (f[k] - px);
    px = f[k];
    pv = p[k];
  }
  acc += 0.5 * (pv + interp(hi)) * (hi - px);
  return acc;
}

}  // namespace detail

inline std::array<double, 5> band_powers(const std::vector<double>& freqs, const std::vector<double>& psd) {
  if (freqs.size() != psd.size()) fail(ErrorKind::shape_mismatch, "freqs and psd differ in length");
  std::array<double, 5> out{};
  for (std::size_t b = 0; b < kEegBands.size(); ++b) {
    out[b] = std::max(0.0, detail::integrate_band(freqs, psd, kEegBands[b].lo, kEegBands[b].hi));
  }
  return out;
}

inline std::array<double, 5> band_powers(const Psd& p) { return band_powers(p.freqs, p.psd); }

// ------------------------------------------------------------------ entropy

// Shannon entropy of the PSD as a distribution, normalized by ln(bins).
inline double spectral_entropy(const std::vector<double>& psd) {
  double total = 0.0;
  for (double v : psd) {
    if (v < 0.0 || !std::isfinite(v)) fail(ErrorKind::invalid_argument, "PSD must be finite and nonnegative");
    total += v;
  }
  if (total <= 0.0) fail(ErrorKind::degenerate_input, "spectral entropy of an all-zero PSD");
  if (psd.size() < 2) return 0.0;
  double h = 0.0;
  for (double v : psd) {
    if (v <= 0.0) continue;
    const double q = v / total;
    h -= q * std::log(q);
  }
  return std::clamp(h / std::log(static_cast<double>(psd.size())), 0.0, 1.0);
}

// ------------------------------------------------------------------ time stats

struct TimeStats {
  double mean = 0, variance = 0, min = 0, max = 0, skewness = 0, kurtosis = 0;
  bool degenerate = false;  // zero variance: skewness and kurtosis forced to 0
};

inline TimeStats time_stats(const Signal& signal) {
  const auto x = signal.samples();
  if (x.size() < 2) fail(ErrorKind::too_short, "time statistics need at least 2 samples");
  TimeStats t;
  t.mean = detail::mean(x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  t.min = *lo;
  t.max = *hi;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - t.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n, m3 /= n, m4 /= n;
  t.variance = m2;
  // Relative test: a constant signal can leave rounding dust in m2.
  if (m2 <= 1e-24 * std::max(1.0, t.mean * t.mean)) {
    t.variance = 0.0;
    t.degenerate = true;
    return t;
  }
  t.skewness = m3 / std::pow(m2, 1.5);
  t.kurtosis = m4 / (m2 * m2) - 3.0;
  return t;
}

// ------------------------------------------------------------------ matrix

struct EpochConfig {
  double window_s = 2.0;
  double overlap = 0.0;
};

inline constexpr std::array<const char*, 12> kChannelFeatures = {
    "delta", "theta", "alpha", "beta", "gamma", "entropy", "mean", "variance", "min", "max", "skewness", "kurtosis"};

inline std::vector<std::string> feature_names_for(const std::vector<std::string>& channels) {
  std::vector<std::string> names;
  for (const auto& ch : channels)
    for (const char* f : kChannelFeatures) names.push_back(ch + "_" + f);
  return names;
}

// The 12 per-channel features of one epoch; silent epochs give a flagged zero
// entropy.
inline std::array<double, 12> channel_features(const Signal& epoch, std::size_t* degenerate = nullptr) {
  const auto psd = welch_psd(epoch, std::min(kDefaultWelchSegment, epoch.size()));
  const auto bands = band_powers(psd);
  double entropy = 0.0;
  double total = 0.0;
  for (double v : psd.psd) total += v;
  if (total > 0.0) {
    entropy = spectral_entropy(psd.psd);
  } else if (degenerate) {
    ++*degenerate;
  }
  const auto ts = time_stats(epoch);
  if (ts.degenerate && degenerate) *degenerate += 2;
  return {bands[0], bands[1], bands[2], bands[3], bands[4], entropy,
          ts.mean,  ts.variance, ts.min, ts.max, ts.skewness, ts.kurtosis};
}

inline FeatureMatrix build_feature_matrix(const Recording& rec, const EpochConfig& cfg = {},
                                          std::optional<int> label = std::nullopt) {
  FeatureMatrix fm;
  fm.feature_names = feature_names_for(rec.names());
  std::vector<std::vector<Signal>> epochs;
  for (std::size_t c = 0; c < rec.channel_count(); ++c) epochs.push_back(segment_epochs(rec.channel(c), cfg.window_s, cfg.overlap));
  const std::size_t n_epochs = epochs.empty() ? 0 : epochs.front().size();
  for (std::size_t e = 0; e < n_epochs; ++e) {
    std::vector<double> row;
    row.reserve(fm.feature_names.size());
    for (std::size_t c = 0; c < rec.channel_count(); ++c) {
      const auto f = channel_features(epochs[c][e], &fm.degenerate_count);
      row.insert(row.end(), f.begin(), f.end());
    }
    fm.rows.push_back(std::move(row));
  }
  if (label) fm.labels = std::vector<int>(fm.rows.size(), *label);
  return fm;
}

}  // namespace eegscrub
