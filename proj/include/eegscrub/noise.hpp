#pragma once

#include "eegscrub/filter.hpp"
#include "eegscrub/random.hpp"
#include "eegscrub/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace eegscrub {

enum class NoiseKind { awgn, powerline, baseline_wander, emg_burst, blink };

inline const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::awgn: return "awgn";
    case NoiseKind::powerline: return "powerline";
    case NoiseKind::baseline_wander: return "baseline_wander";
    case NoiseKind::emg_burst: return "emg_burst";
    case NoiseKind::blink: return "blink";
  }
  return "?";
}

inline NoiseKind parse_noise_kind(const std::string& s) {
  for (auto k : {NoiseKind::awgn, NoiseKind::powerline, NoiseKind::baseline_wander, NoiseKind::emg_burst, NoiseKind::blink}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorKind::unknown_kind, "unknown noise kind '" + s + "'");
}

// Default parameters per kind. Every accepted key appears here.
//   awgn:            sigma
//   powerline:       freq (Hz), amp
//   baseline_wander: freq (Hz, < 1), amp, walk (random-walk RMS relative to the sinusoid's)
//   emg_burst:       lo, hi (Hz), duty (fraction on), period (s), sigma
//   blink:           width (s), rate (per minute), amp
inline std::map<std::string, double> noise_defaults(NoiseKind k) {
  switch (k) {
    case NoiseKind::awgn: return {{"sigma", 1.0}};
    case NoiseKind::powerline: return {{"freq", 50.0}, {"amp", 1.0}};
    case NoiseKind::baseline_wander: return {{"freq", 0.3}, {"amp", 1.0}, {"walk", 0.5}};
    case NoiseKind::emg_burst: return {{"lo", 20.0}, {"hi", 60.0}, {"duty", 0.5}, {"period", 1.0}, {"sigma", 1.0}};
    case NoiseKind::blink: return {{"width", 0.3}, {"rate", 15.0}, {"amp", 1.0}};
  }
  return {};
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::awgn;
  std::map<std::string, double> params;  // resolved: defaults merged with overrides
  std::uint64_t seed = 0;

  static NoiseSpec make(NoiseKind kind, std::map<std::string, double> overrides = {}, std::uint64_t seed = 0) {
    NoiseSpec s{kind, noise_defaults(kind), seed};
    for (const auto& [k, v] : overrides) {
      if (!s.params.count(k)) fail(ErrorKind::invalid_argument, "parameter '" + k + "' not valid for " + to_string(kind));
      s.params[k] = v;
    }
    s.validate();
    return s;
  }

  double param(const std::string& key) const { return params.at(key); }

  void validate() const {
    auto need = [&](bool ok, const std::string& what) {
      if (!ok) fail(ErrorKind::invalid_argument, std::string(to_string(kind)) + ": " + what);
    };
    for (const auto& [k, v] : params) need(std::isfinite(v), k + " must be finite");
    switch (kind) {
      case NoiseKind::awgn: need(param("sigma") > 0, "sigma must be positive"); break;
      case NoiseKind::powerline: need(param("freq") > 0, "freq must be positive"); break;
      case NoiseKind::baseline_wander:
        need(param("freq") > 0 && param("freq") < 1.0, "freq must lie in (0, 1) Hz");
        need(param("walk") >= 0, "walk must be nonnegative");
        break;
      case NoiseKind::emg_burst:
        need(param("lo") > 0 && param("lo") < param("hi"), "need 0 < lo < hi");
        need(param("duty") > 0 && param("duty") <= 1, "duty must lie in (0, 1]");
        need(param("period") > 0 && param("sigma") > 0, "period and sigma must be positive");
        break;
      case NoiseKind::blink:
        need(param("width") > 0 && param("rate") > 0, "width and rate must be positive");
        break;
    }
  }

  // Flat key=value form, e.g. "kind=emg_burst,duty=0.5,seed=7".
  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "kind=" << to_string(kind);
    for (const auto& [k, v] : params) os << "," << k << "=" << v;
    os << ",seed=" << seed;
    return os.str();
  }

  static NoiseSpec parse(const std::string& text) {
    std::optional<NoiseKind> kind;
    std::map<std::string, double> overrides;
    std::uint64_t seed = 0;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) fail(ErrorKind::parse, "noise spec item '" + item + "' is not key=value");
      const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
      if (key == "kind") {
        kind = parse_noise_kind(val);
      } else if (key == "seed") {
        try {
          seed = std::stoull(val);
        } catch (const std::exception&) {
          fail(ErrorKind::parse, "bad seed '" + val + "'");
        }
      } else {
        try {
          std::size_t used = 0;
          overrides[key] = std::stod(val, &used);
          if (used != val.size()) throw std::invalid_argument(val);
        } catch (const std::exception&) {
          fail(ErrorKind::parse, "bad value for '" + key + "': '" + val + "'");
        }
      }
    }
    if (!kind) fail(ErrorKind::parse, "noise spec lacks kind=");
    return make(*kind, overrides, seed);
  }

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

namespace detail {

inline void scale_to_rms(std::vector<double>& x, double target) {
  const double r = rms(x);
  if (r > 0.0)
    for (auto& v : x) v *= target / r;
}

}  // namespace detail

// Deterministic contaminant of n samples at fs. The random stream is keyed by
// (seed, kind), so the same spec always yields the same samples.
inline Signal gen_noise(const NoiseSpec& spec, std::size_t n, double fs) {
  if (n < 1) fail(ErrorKind::invalid_argument, "noise length must be at least 1");
  if (!(fs > 0)) fail(ErrorKind::invalid_argument, "sampling rate must be positive");
  spec.validate();
  CounterRng rng(spec.seed, to_string(spec.kind));
  std::vector<double> x(n, 0.0);
  const double two_pi = 2.0 * detail::pi;
  auto t = [&](std::size_t i) { return static_cast<double>(i) / fs; };

  switch (spec.kind) {
    case NoiseKind::awgn: {
      const double sigma = spec.param("sigma");
      for (auto& v : x) v = sigma * rng.normal();
      break;
    }
    case NoiseKind::powerline: {
      const double f = spec.param("freq"), amp = spec.param("amp");
      if (f >= fs / 2) fail(ErrorKind::invalid_argument, "powerline frequency at or above Nyquist");
      const double phase = two_pi * rng.uniform();
      for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(two_pi * f * t(i) + phase);
      break;
    }
    case NoiseKind::baseline_wander: {
      const double f = spec.param("freq"), amp = spec.param("amp");
      const double phase = two_pi * rng.uniform();
      std::vector<double> walk(n, 0.0);
      CounterRng wrng = rng.split("walk");
      for (std::size_t i = 1; i < n; ++i) walk[i] = walk[i - 1] + wrng.normal();
      const double m = detail::mean(walk);
      for (auto& v : walk) v -= m;
      if (n >= 12 && fs > 2.0) walk = apply_filter(Signal(walk, fs), FilterSpec::lowpass(0.5, 2)).values();
      detail::scale_to_rms(walk, spec.param("walk") * amp / std::sqrt(2.0));
      for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(two_pi * f * t(i) + phase) + walk[i];
      break;
    }
    case NoiseKind::emg_burst: {
      const double duty = spec.param("duty"), period = spec.param("period");
      const double hi = std::min(spec.param("hi"), 0.45 * fs);
      const double lo = spec.param("lo");
      if (!(lo < hi)) fail(ErrorKind::invalid_argument, "EMG band does not fit below Nyquist");
      const double offset = rng.uniform();
      CounterRng grng = rng.split("gauss");
      for (std::size_t i = 0; i < n; ++i) {
        const double cycle = t(i) / period + offset;
        const bool on = duty >= 1.0 || (cycle - std::floor(cycle)) < duty;
        const double g = grng.normal();
        x[i] = on ? g : 0.0;
      }
      // Gate first, then band-limit, so the bursts stay inside the band.
      if (n >= 12) x = apply_filter(Signal(x, fs), FilterSpec::bandpass(lo, hi, 4)).values();
      detail::scale_to_rms(x, spec.param("sigma"));
      break;
    }
    case NoiseKind::blink: {
      const double amp = spec.param("amp");
      const auto width = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(spec.param("width") * fs)));
      const double rate_hz = spec.param("rate") / 60.0;
      std::vector<std::size_t> starts;
      for (double at = rng.exponential(rate_hz); at < t(n - 1); at += rng.exponential(rate_hz)) {
        starts.push_back(static_cast<std::size_t>(at * fs));
      }
      // A record too short to contain an event still gets one blink.
      if (starts.empty()) starts.push_back(static_cast<std::size_t>(rng.below(n)));
      for (auto s : starts) {
        for (std::size_t k = 0; k < width && s + k < n; ++k) {
          x[s + k] += amp * 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(k) / static_cast<double>(width - 1)));
        }
      }
      break;
    }
  }
  return Signal(std::move(x), fs);
}

// Unit-amplitude raised-cosine bump, the blink shape used by gen_noise.
inline Signal blink_template(double width_s, double fs) {
  const auto width = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(width_s * fs)));
  std::vector<double> x(width);
  for (std::size_t k = 0; k < width; ++k)
    x[k] = 0.5 * (1.0 - std::cos(2.0 * detail::pi * static_cast<double>(k) / static_cast<double>(width - 1)));
  return Signal(std::move(x), fs);
}

inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

struct MixReport {
  double target_snr_db = 0.0;
  double achieved_snr_db = 0.0;
  double noise_scale = 0.0;
  std::optional<NoiseSpec> spec;
};

// clean + k * noise with k chosen so that P_clean / P_(k noise) = 10^(snr/10),
// power being the mean square over the whole record. snr = +inf gives k = 0.
inline std::pair<Signal, MixReport> mix_at_snr(const Signal& clean, const Signal& noise, double snr_db,
                                               std::optional<NoiseSpec> spec = std::nullopt) {
  if (clean.size() != noise.size()) fail(ErrorKind::shape_mismatch, "clean and noise lengths differ");
  if (std::isnan(snr_db)) fail(ErrorKind::invalid_argument, "SNR must not be NaN");
  const double pc = detail::mean_square(clean.samples());
  const double pn = detail::mean_square(noise.samples());
  if (pc == 0.0) fail(ErrorKind::degenerate_input, "clean signal is all zero");
  if (pn == 0.0) fail(ErrorKind::degenerate_input, "noise signal is all zero");
  MixReport rep;
  rep.target_snr_db = snr_db;
  rep.spec = std::move(spec);
  if (snr_db == kInfiniteSnr) {
    rep.achieved_snr_db = kInfiniteSnr;
    return {clean, rep};
  }
  rep.noise_scale = std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> out = clean.values();
  std::vector<double> scaled(noise.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    scaled[i] = rep.noise_scale * noise[i];
    out[i] += scaled[i];
  }
  rep.achieved_snr_db = 10.0 * std::log10(pc / detail::mean_square(scaled));
  return {clean.with_samples(std::move(out)), rep};
}

struct Metrics {
  double snr_db = 0.0;  // +inf when test == clean
  double rmse = 0.0;
  double corr = 0.0;
  bool corr_degenerate = false;  // a constant input; corr reported as 0
};

inline double pearson(std::span<const double> a, std::span<const double> b, bool* degenerate = nullptr) {
  const double ma = detail::mean(a), mb = detail::mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  if (degenerate) *degenerate = false;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline Metrics compute_metrics(const Signal& clean, const Signal& test) {
  if (clean.size() != test.size()) fail(ErrorKind::shape_mismatch, "metric inputs differ in length");
  if (clean.size() < 2) fail(ErrorKind::too_short, "metrics need at least 2 samples");
  Metrics m;
  double err = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) err += (clean[i] - test[i]) * (clean[i] - test[i]);
  err /= static_cast<double>(clean.size());
  m.rmse = std::sqrt(err);
  m.snr_db = err == 0.0 ? kInfiniteSnr : 10.0 * std::log10(detail::mean_square(clean.samples()) / err);
  m.corr = pearson(clean.samples(), test.samples(), &m.corr_degenerate);
  return m;
}

}  // namespace eegscrub
