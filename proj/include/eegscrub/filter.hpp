#pragma once

#include "eegscrub/linalg.hpp"
#include "eegscrub/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eegscrub {

enum class FilterKind { bandpass, lowpass, highpass, notch };

struct FilterSpec {
  FilterKind kind = FilterKind::bandpass;
  std::vector<double> edges;  // Hz; two for bandpass, one otherwise
  int order = 4;              // Butterworth prototype order (ignored by notch)
  double notch_q = 30.0;

  static FilterSpec bandpass(double lo, double hi, int order = 4) { return {FilterKind::bandpass, {lo, hi}, order, 0.0}; }
  static FilterSpec lowpass(double fc, int order = 4) { return {FilterKind::lowpass, {fc}, order, 0.0}; }
  static FilterSpec highpass(double fc, int order = 4) { return {FilterKind::highpass, {fc}, order, 0.0}; }
  static FilterSpec notch(double f0, double q = 30.0) { return {FilterKind::notch, {f0}, 2, q}; }

  // Default EEG preprocessing band.
  static FilterSpec eeg_default() { return bandpass(0.5, 45.0, 4); }
};

// One biquad in transposed direct form II, a0 normalized to 1.
struct Sos {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

namespace detail {

inline void validate_filter(const FilterSpec& spec, double fs) {
  const double nyq = fs / 2.0;
  const std::size_t want = spec.kind == FilterKind::bandpass ? 2 : 1;
  if (spec.edges.size() != want) fail(ErrorKind::invalid_spec, "wrong number of corner frequencies");
  for (double e : spec.edges) {
    if (!(e > 0.0) || !(e < nyq)) {
      fail(ErrorKind::invalid_spec, "corner " + std::to_string(e) + " Hz outside (0, " + std::to_string(nyq) + ") Hz");
    }
  }
  if (spec.kind == FilterKind::bandpass && !(spec.edges[0] < spec.edges[1])) {
    fail(ErrorKind::invalid_spec, "bandpass low edge must be below high edge");
  }
  if (spec.kind == FilterKind::notch) {
    if (!(spec.notch_q > 0.0)) fail(ErrorKind::invalid_spec, "notch Q must be positive");
  } else if (spec.order < 1 || spec.order > 16) {
    fail(ErrorKind::invalid_spec, "filter order must be in [1, 16]");
  }
}

inline std::complex<double> sos_response(const std::vector<Sos>& sos, std::complex<double> z) {
  const std::complex<double> zi = 1.0 / z;
  std::complex<double> h = 1.0;
  for (const auto& s : sos) {
    h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
  }
  return h;
}

}  // namespace detail

// Second-order sections of a Butterworth design (bilinear transform with
// prewarping), or a single RBJ biquad for a notch.
inline std::vector<Sos> design_sos(const FilterSpec& spec, double fs) {
  using C = std::complex<double>;
  detail::validate_filter(spec, fs);

  if (spec.kind == FilterKind::notch) {
    const double w0 = 2.0 * detail::pi * spec.edges[0] / fs;
    const double alpha = std::sin(w0) / (2.0 * spec.notch_q);
    const double a0 = 1.0 + alpha;
    return {Sos{1.0 / a0, -2.0 * std::cos(w0) / a0, 1.0 / a0, -2.0 * std::cos(w0) / a0, (1.0 - alpha) / a0}};
  }

  const int n = spec.order;
  const double k2 = 2.0 * fs;
  auto warp = [&](double f) { return k2 * std::tan(detail::pi * f / fs); };

  std::vector<C> proto;
  for (int k = 0; k < n; ++k) proto.push_back(std::polar(1.0, detail::pi * (2.0 * k + n + 1) / (2.0 * n)));

  std::vector<C> analog;
  double ref_w = 0.0;  // digital reference frequency for unit gain (rad/sample)
  switch (spec.kind) {
    case FilterKind::lowpass: {
      const double w = warp(spec.edges[0]);
      for (auto p : proto) analog.push_back(w * p);
      ref_w = 0.0;
      break;
    }
    case FilterKind::highpass: {
      const double w = warp(spec.edges[0]);
      for (auto p : proto) analog.push_back(w / p);
      ref_w = detail::pi;
      break;
    }
    case FilterKind::bandpass: {
      const double w1 = warp(spec.edges[0]);
      const double w2 = warp(spec.edges[1]);
      const double bw = w2 - w1;
      const double w0 = std::sqrt(w1 * w2);
      for (auto p : proto) {
        const C half = p * bw / 2.0;
        const C root = std::sqrt(half * half - w0 * w0);
        analog.push_back(half + root);
        analog.push_back(half - root);
      }
      ref_w = 2.0 * std::atan(w0 / k2);
      break;
    }
    case FilterKind::notch: break;
  }

  std::vector<C> digital;
  for (auto s : analog) digital.push_back((k2 + s) / (k2 - s));

  // Group into conjugate pairs; leftover real poles are paired with each other.
  std::vector<std::pair<C, C>> pairs;
  std::vector<double> reals;
  for (auto z : digital) {
    if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) {
      reals.push_back(z.real());
    } else if (z.imag() > 0.0) {
      pairs.emplace_back(z, std::conj(z));
    }
  }
  std::sort(reals.begin(), reals.end());

  std::vector<Sos> sos;
  auto zeros_for = [&](int pole_count) -> Sos {
    Sos s;
    if (spec.kind == FilterKind::bandpass) {
      s.b0 = 1.0, s.b1 = 0.0, s.b2 = -1.0;
    } else {
      const double z = spec.kind == FilterKind::lowpass ? -1.0 : 1.0;
      if (pole_count == 2) {
        s.b0 = 1.0, s.b1 = -2.0 * z, s.b2 = 1.0;
      } else {
        s.b0 = 1.0, s.b1 = -z, s.b2 = 0.0;
      }
    }
    return s;
  };
  for (auto& [p, pc] : pairs) {
    Sos s = zeros_for(2);
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    sos.push_back(s);
  }
  for (std::size_t i = 0; i < reals.size(); i += 2) {
    if (i + 1 < reals.size()) {
      Sos s = zeros_for(2);
      s.a1 = -(reals[i] + reals[i + 1]);
      s.a2 = reals[i] * reals[i + 1];
      sos.push_back(s);
    } else {
      Sos s = zeros_for(1);
      s.a1 = -reals[i];
      s.a2 = 0.0;
      sos.push_back(s);
    }
  }

  const double g = std::abs(detail::sos_response(sos, std::polar(1.0, ref_w)));
  sos.front().b0 /= g;
  sos.front().b1 /= g;
  sos.front().b2 /= g;
  return sos;
}

// Complex frequency response of the (single-pass) cascade at f Hz.
inline std::complex<double> frequency_response(const std::vector<Sos>& sos, double f, double fs) {
  return detail::sos_response(sos, std::polar(1.0, 2.0 * detail::pi * f / fs));
}

namespace detail {

inline void sosfilt_inplace(const std::vector<Sos>& sos, std::vector<double>& x) {
  // Steady-state initial conditions for a constant input equal to x[0].
  double level = x.empty() ? 0.0 : x[0];
  std::vector<std::pair<double, double>> state;
  for (const auto& s : sos) {
    const double den = 1.0 + s.a1 + s.a2;
    const double gain = den != 0.0 ? (s.b0 + s.b1 + s.b2) / den : 0.0;
    const double y = gain * level;
    const double z2 = s.b2 * level - s.a2 * y;
    const double z1 = s.b1 * level - s.a1 * y + z2;
    state.emplace_back(z1, z2);
    level = y;
  }
  for (auto& v : x) {
    double in = v;
    for (std::size_t k = 0; k < sos.size(); ++k) {
      const auto& s = sos[k];
      auto& [z1, z2] = state[k];
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      in = out;
    }
    v = in;
  }
}

inline std::size_t filtfilt_padlen(const std::vector<Sos>& sos, std::size_t n) {
  // Long enough for the slowest pole to decay by ~1e-3, never less than the
  // customary 3 * (taps).
  double rmax = 0.0;
  for (const auto& s : sos) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2));
    rmax = std::max({rmax, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
  }
  std::size_t settle = 0;
  if (rmax > 0.0 && rmax < 1.0) settle = static_cast<std::size_t>(std::ceil(std::log(1e-3) / std::log(rmax)));
  const std::size_t want = std::max<std::size_t>(3 * (2 * sos.size() + 1), settle);
  return std::min(want, n - 1);
}

}  // namespace detail

// Zero-phase filtering: forward then backward pass over an odd-reflected
// extension of the input, so the result has no group delay.
inline Signal apply_filter(const Signal& signal, const FilterSpec& spec) {
  detail::validate_filter(spec, signal.fs());
  const int order = spec.kind == FilterKind::notch ? 2 : spec.order;
  if (signal.size() < static_cast<std::size_t>(3 * order)) {
    fail(ErrorKind::too_short, "signal of " + std::to_string(signal.size()) + " samples is shorter than 3x filter order");
  }
  const auto sos = design_sos(spec, signal.fs());
  const auto& x = signal.values();
  const std::size_t n = x.size();
  const std::size_t pad = detail::filtfilt_padlen(sos, n);

  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * x[0] - x[pad - i];
    ext[n + pad + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  detail::sosfilt_inplace(sos, ext);
  std::reverse(ext.begin(), ext.end());
  detail::sosfilt_inplace(sos, ext);
  std::reverse(ext.begin(), ext.end());

  return signal.with_samples({ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)});
}

inline Recording apply_filter(const Recording& rec, const FilterSpec& spec) {
  std::vector<Signal> out;
  for (const auto& ch : rec.channels()) out.push_back(apply_filter(ch, spec));
  return rec.with_channels(std::move(out));
}

// Fixed-length windows of floor(window_s * fs) samples; the trailing partial
// window is dropped. A window longer than the signal yields no epochs.
inline std::vector<Signal> segment_epochs(const Signal& signal, double window_s, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) fail(ErrorKind::invalid_argument, "overlap must lie in [0, 1)");
  const double raw = window_s * signal.fs();
  if (!(raw >= 2.0)) fail(ErrorKind::invalid_argument, "epoch window must cover at least 2 samples");
  const auto win = static_cast<std::size_t>(std::floor(raw + 1e-9));
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(win) * (1.0 - overlap) + 1e-9)));
  std::vector<Signal> epochs;
  const auto& x = signal.values();
  for (std::size_t start = 0; start + win <= x.size(); start += hop) {
    epochs.push_back(signal.with_samples({x.begin() + static_cast<std::ptrdiff_t>(start),
                                          x.begin() + static_cast<std::ptrdiff_t>(start + win)}));
  }
  return epochs;
}

enum class NormMode { zscore, minmax };

inline const char* to_string(NormMode m) { return m == NormMode::zscore ? "zscore" : "minmax"; }

// Per-column affine map x -> (x - center) / scale.
struct NormStats {
  NormMode mode = NormMode::zscore;
  std::vector<double> center;
  std::vector<double> scale;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

// Columns are normalized independently. zscore uses the population standard
// deviation; a constant column gets scale 1 and so maps to zeros. When `stats`
// is given it is applied as-is (the held-out-data path).
inline std::pair<Matrix, NormStats> normalize(const Matrix& data, NormMode mode,
                                              const std::optional<NormStats>& stats = std::nullopt) {
  if (data.empty()) fail(ErrorKind::invalid_argument, "cannot normalize empty data");
  NormStats st;
  if (stats) {
    st = *stats;
    if (st.center.size() != data.cols() || st.scale.size() != data.cols()) {
      fail(ErrorKind::shape_mismatch, "normalization stats do not match column count");
    }
  } else {
    st.mode = mode;
    const std::size_t n = data.rows();
    for (std::size_t c = 0; c < data.cols(); ++c) {
      if (mode == NormMode::zscore) {
        double m = 0.0;
        for (std::size_t r = 0; r < n; ++r) m += data(r, c);
        m /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t r = 0; r < n; ++r) v += (data(r, c) - m) * (data(r, c) - m);
        const double sd = std::sqrt(v / static_cast<double>(n));
        const bool constant = sd <= 1e-12 * std::abs(m) || sd == 0.0;
        st.center.push_back(m);
        st.scale.push_back(constant ? 1.0 : sd);
      } else {
        double lo = data(0, c), hi = data(0, c);
        for (std::size_t r = 1; r < n; ++r) {
          lo = std::min(lo, data(r, c));
          hi = std::max(hi, data(r, c));
        }
        st.center.push_back(lo);
        st.scale.push_back(hi > lo ? hi - lo : 1.0);
      }
    }
  }
  Matrix out(data.rows(), data.cols());
  for (std::size_t r = 0; r < data.rows(); ++r)
    for (std::size_t c = 0; c < data.cols(); ++c) out(r, c) = (data(r, c) - st.center[c]) / st.scale[c];
  return {std::move(out), std::move(st)};
}

inline Matrix denormalize(const Matrix& data, const NormStats& stats) {
  if (stats.center.size() != data.cols()) fail(ErrorKind::shape_mismatch, "normalization stats do not match column count");
  Matrix out(data.rows(), data.cols());
  for (std::size_t r = 0; r < data.rows(); ++r)
    for (std::size_t c = 0; c < data.cols(); ++c) out(r, c) = data(r, c) * stats.scale[c] + stats.center[c];
  return out;
}

inline std::pair<Signal, NormStats> normalize(const Signal& signal, NormMode mode,
                                              const std::optional<NormStats>& stats = std::nullopt) {
  Matrix m(signal.size(), 1);
  for (std::size_t i = 0; i < signal.size(); ++i) m(i, 0) = signal[i];
  auto [out, st] = normalize(m, mode, stats);
  return {signal.with_samples(std::move(out.data())), std::move(st)};
}

namespace detail {

// Half-sample symmetric reflection: x[-1] = x[0], x[n] = x[n-1].
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  while (i < 0 || i >= sn) {
    if (i < 0) i = -i - 1;
    if (i >= sn) i = 2 * sn - i - 1;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace detail

// Centered moving average with symmetric edge reflection.
inline Signal moving_average(const Signal& signal, int width) {
  if (width < 1 || width % 2 == 0) fail(ErrorKind::invalid_argument, "moving-average width must be odd and positive");
  if (static_cast<std::size_t>(width) > signal.size()) fail(ErrorKind::invalid_argument, "moving-average width exceeds signal length");
  const auto& x = signal.values();
  const auto n = x.size();
  const int half = width / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = -half; k <= half; ++k) s += x[detail::reflect_index(static_cast<std::ptrdiff_t>(i) + k, n)];
    out[i] = s / static_cast<double>(width);
  }
  return signal.with_samples(std::move(out));
}

}  // namespace eegscrub
