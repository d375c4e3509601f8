#pragma once

#include "eegscrub/cca.hpp"
#include "eegscrub/emd.hpp"
#include "eegscrub/fft.hpp"
#include "eegscrub/filter.hpp"
#include "eegscrub/noise.hpp"
#include "eegscrub/ssa.hpp"
#include "eegscrub/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace eegscrub {

// Provenance of one denoising run.
struct DenoiseReport {
  std::string method_id;
  std::map<std::string, std::string> params;
  std::vector<std::string> components_removed;
  std::size_t input_len = 0;
};

template <typename T>
using Denoised = std::pair<T, DenoiseReport>;

inline const std::vector<std::string>& registered_methods() {
  static const std::vector<std::string> ids = {"identity", "dwt", "emd_maf", "ssa_motion", "ssa_cca",
                                               "akf", "cascade_lms", "blink_template"};
  return ids;
}

inline bool is_registered_method(const std::string& id) {
  const auto& ids = registered_methods();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline double median_abs(std::vector<double> v) {
  for (auto& x : v) x = std::abs(x);
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace detail

// ------------------------------------------------------------------ DWT

enum class ThresholdMode { soft, hard };

inline const char* to_string(ThresholdMode m) { return m == ThresholdMode::soft ? "soft" : "hard"; }

// Wavelet shrinkage with the universal threshold T = sigma * sqrt(2 ln N),
// sigma estimated as median(|finest detail|) / 0.6745, applied to every detail
// band. The approximation band is kept.
inline Denoised<Signal> denoise_dwt(const Signal& signal, int levels = 3, ThresholdMode mode = ThresholdMode::soft) {
  auto dec = dwt_forward(signal, levels);
  const double sigma = detail::median_abs(dec.details.front()) / 0.6745;
  const double thr = sigma * std::sqrt(2.0 * std::log(static_cast<double>(signal.size())));
  std::size_t zeroed = 0;
  for (auto& band : dec.details) {
    for (auto& c : band) {
      const double a = std::abs(c);
      if (a <= thr) {
        zeroed += c != 0.0;
        c = 0.0;
      } else if (mode == ThresholdMode::soft) {
        c = std::copysign(a - thr, c);
      }
    }
  }
  DenoiseReport rep{"dwt",
                    {{"levels", std::to_string(levels)},
                     {"mode", to_string(mode)},
                     {"wavelet", dec.wavelet_id},
                     {"sigma", detail::fmt(sigma)},
                     {"threshold", detail::fmt(thr)}},
                    {std::to_string(zeroed) + " detail coefficients zeroed"},
                    signal.size()};
  auto out = dwt_inverse(dec);
  return {Signal(std::move(out).values(), signal.fs()), std::move(rep)};
}

// ------------------------------------------------------------------ EMD-MAF

inline constexpr double kHighFrequencyImfHz = 30.0;

// Moving-average smoothing of the IMFs whose dominant frequency exceeds 30 Hz;
// the other IMFs and the residual pass through untouched.
inline Denoised<Signal> denoise_emd_maf(const Signal& signal, int ma_width = 9, const EmdOptions& opt = {}) {
  if (ma_width < 1 || ma_width % 2 == 0) fail(ErrorKind::invalid_argument, "moving-average width must be odd and positive");
  const auto set = emd(signal, opt);
  std::vector<double> out = set.residual.values();
  DenoiseReport rep{"emd_maf",
                    {{"ma_width", std::to_string(ma_width)},
                     {"hf_cutoff_hz", detail::fmt(kHighFrequencyImfHz)},
                     {"imf_count", std::to_string(set.imfs.size())}},
                    {},
                    signal.size()};
  for (std::size_t k = 0; k < set.imfs.size(); ++k) {
    const auto& imf = set.imfs[k];
    const double f = dominant_frequency(imf.samples(), signal.fs());
    const bool smooth = f > kHighFrequencyImfHz && static_cast<std::size_t>(ma_width) <= imf.size();
    const auto used = smooth ? moving_average(imf, ma_width) : imf;
    if (smooth) rep.components_removed.push_back("imf" + std::to_string(k) + "@" + detail::fmt(f) + "Hz smoothed");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += used[i];
  }
  return {signal.with_samples(std::move(out)), std::move(rep)};
}

// ------------------------------------------------------------------ SSA motion

inline constexpr double kMotionMaxHz = 1.0;

// Drops SSA components that are both large (share of the singular-value sum
// above var_thresh) and slow (dominant frequency below 1 Hz).
inline Denoised<Signal> remove_motion_ssa(const Signal& signal, std::size_t window_len = 0, double var_thresh = 0.1) {
  if (window_len == 0) window_len = ssa_default_window(signal.size());
  if (!(var_thresh >= 0.0 && var_thresh < 1.0)) fail(ErrorKind::invalid_argument, "var_thresh must lie in [0, 1)");
  const auto model = ssa_decompose(signal, window_len);
  std::set<std::size_t> keep;
  DenoiseReport rep{"ssa_motion",
                    {{"window_len", std::to_string(window_len)}, {"var_thresh", detail::fmt(var_thresh)},
                     {"max_freq_hz", detail::fmt(kMotionMaxHz)}},
                    {},
                    signal.size()};
  for (std::size_t i = 0; i < model.elementary_components.size(); ++i) {
    const double mass = model.singular_value_fraction(i);
    bool drop = false;
    if (mass > var_thresh) {
      const double f = dominant_frequency(model.elementary_components[i].samples(), signal.fs());
      drop = f < kMotionMaxHz;
      if (drop) rep.components_removed.push_back("ssa" + std::to_string(i) + " mass=" + detail::fmt(mass) + " f=" + detail::fmt(f) + "Hz");
    }
    if (!drop) keep.insert(i);
  }
  if (rep.components_removed.empty()) return {signal, std::move(rep)};
  return {ssa_reconstruct(model, keep), std::move(rep)};
}

// ------------------------------------------------------------------ SSA-CCA

struct SsaCcaOptions {
  double autocorr_thresh = 0.9;
  std::size_t components_per_channel = 4;
  std::size_t window_len = 0;  // 0: default SSA window
};

// Few-channel muscle removal. Each channel is split into its leading SSA
// components, the stacked set is unmixed by CCA against its one-sample-delayed
// copy, sources with lag-1 autocorrelation below the threshold are zeroed, and
// each channel is rebuilt as the sum of its back-projected components.
inline Denoised<Recording> remove_muscle_ssa_cca(const Recording& rec, const SsaCcaOptions& opt = {}) {
  const std::size_t nch = rec.channel_count();
  const std::size_t n = rec.size();
  if (nch > 8) fail(ErrorKind::invalid_argument, "SSA-CCA supports 1 to 8 channels");
  if (static_cast<double>(n) / rec.fs() < 2.0 - 1e-9) fail(ErrorKind::too_short, "SSA-CCA needs at least 2 s of data");
  if (!(opt.autocorr_thresh > 0.0 && opt.autocorr_thresh < 1.0)) fail(ErrorKind::invalid_argument, "autocorr_thresh must lie in (0, 1)");
  const std::size_t window = opt.window_len ? opt.window_len : ssa_default_window(n);
  const std::size_t k = std::min(opt.components_per_channel, window);
  if (k < 1) fail(ErrorKind::invalid_argument, "need at least one component per channel");

  Matrix z(nch * k, n);
  for (std::size_t c = 0; c < nch; ++c) {
    const auto model = ssa_decompose(rec.channel(c), window);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& comp = model.elementary_components[j].values();
      std::copy(comp.begin(), comp.end(), z.row_ptr(c * k + j));
    }
  }
  const std::size_t rows = z.rows();
  Matrix lead(rows, n - 1), lag(rows, n - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(z.row_ptr(r) + 1, z.row_ptr(r) + n, lead.row_ptr(r));
    std::copy(z.row_ptr(r), z.row_ptr(r) + n - 1, lag.row_ptr(r));
  }
  const auto res = cca(std::move(lead), std::move(lag));

  Matrix zc = z;
  const auto means = detail::center_rows(zc);
  Matrix sources = res.wx.transposed() * zc;
  DenoiseReport rep{"ssa_cca",
                    {{"autocorr_thresh", detail::fmt(opt.autocorr_thresh)},
                     {"components_per_channel", std::to_string(k)},
                     {"window_len", std::to_string(window)}},
                    {},
                    n};
  for (std::size_t s = 0; s < sources.rows(); ++s) {
    const std::span<const double> row(sources.row_ptr(s), n);
    const double ac = pearson(row.subspan(1), row.first(n - 1));
    if (ac < opt.autocorr_thresh) {
      std::fill(sources.row_ptr(s), sources.row_ptr(s) + n, 0.0);
      rep.components_removed.push_back("source" + std::to_string(s) + " ac1=" + detail::fmt(ac));
    }
  }
  const Matrix back = res.x_mixing * sources;
  std::vector<Signal> out;
  for (std::size_t c = 0; c < nch; ++c) {
    std::vector<double> ch(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t r = c * k + j;
      for (std::size_t t = 0; t < n; ++t) ch[t] += back(r, t) + means[r];
    }
    out.push_back(rec.channel(c).with_samples(std::move(ch)));
  }
  return {rec.with_channels(std::move(out)), std::move(rep)};
}

// ------------------------------------------------------------------ AKF

struct KalmanConfig {
  double q = 1e-2;        // process-noise variance of the random walk
  double r0 = 1.0;        // initial measurement-noise variance
  int adapt_window = 64;  // samples between measurement-noise updates

  void validate() const {
    if (!(q > 0.0) || !(r0 > 0.0) || adapt_window < 8) {
      fail(ErrorKind::invalid_argument, "Kalman config needs q > 0, r0 > 0, adapt_window >= 8");
    }
  }
};

// Scalar random-walk Kalman filter. Every adapt_window samples the measurement
// variance is re-estimated as mean(innovation^2) - mean(predicted variance),
// floored at r0 / 100.
inline Denoised<Signal> adaptive_kalman_denoise(const Signal& signal, const KalmanConfig& cfg = {}) {
  cfg.validate();
  const auto& z = signal.values();
  std::vector<double> out(z.size());
  double x = z[0];
  double p = cfg.r0;
  double r = cfg.r0;
  double sum_e2 = 0.0, sum_pp = 0.0;
  int count = 0, updates = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double pp = p + cfg.q;
    const double e = z[i] - x;
    const double gain = pp / (pp + r);
    x += gain * e;
    p = (1.0 - gain) * pp;
    out[i] = x;
    sum_e2 += e * e;
    sum_pp += pp;
    if (++count == cfg.adapt_window) {
      r = std::max((sum_e2 - sum_pp) / count, cfg.r0 / 100.0);
      sum_e2 = sum_pp = 0.0;
      count = 0;
      ++updates;
    }
  }
  DenoiseReport rep{"akf",
                    {{"q", detail::fmt(cfg.q)},
                     {"r0", detail::fmt(cfg.r0)},
                     {"adapt_window", std::to_string(cfg.adapt_window)},
                     {"final_r", detail::fmt(r)},
                     {"r_updates", std::to_string(updates)}},
                    {},
                    signal.size()};
  return {signal.with_samples(std::move(out)), std::move(rep)};
}

// ------------------------------------------------------------------ cascade LMS

// One normalized-LMS canceller per reference, applied in sequence. Each stage
// subtracts its running estimate of the reference's contribution.
inline Denoised<Signal> cascade_lms(const Signal& primary, const std::vector<Signal>& references, double mu = 0.05,
                                    int taps = 16) {
  if (!(mu > 0.0)) fail(ErrorKind::invalid_argument, "mu must be positive");
  if (taps < 1) fail(ErrorKind::invalid_argument, "taps must be at least 1");
  for (const auto& r : references) {
    if (r.size() != primary.size()) fail(ErrorKind::shape_mismatch, "reference length differs from primary");
  }
  DenoiseReport rep{"cascade_lms",
                    {{"mu", detail::fmt(mu)}, {"taps", std::to_string(taps)}, {"stages", std::to_string(references.size())}},
                    {},
                    primary.size()};
  std::vector<double> d = primary.values();
  const std::size_t n = d.size();
  const auto nt = static_cast<std::size_t>(taps);
  for (std::size_t stage = 0; stage < references.size(); ++stage) {
    const auto& ref = references[stage].values();
    std::vector<double> w(nt, 0.0);
    std::vector<double> e(n);
    double in_energy = 0.0, out_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double y = 0.0, power = 0.0;
      for (std::size_t j = 0; j < nt && j <= i; ++j) {
        y += w[j] * ref[i - j];
        power += ref[i - j] * ref[i - j];
      }
      e[i] = d[i] - y;
      const double step = mu * e[i] / (power + 1e-8);
      for (std::size_t j = 0; j < nt && j <= i; ++j) w[j] += step * ref[i - j];
      in_energy += d[i] * d[i];
      out_energy += e[i] * e[i];
    }
    if (!std::isfinite(out_energy) || out_energy > 100.0 * in_energy) {
      fail(ErrorKind::divergence, "LMS stage " + std::to_string(stage) + " diverged (output energy " +
                                      detail::fmt(out_energy) + " vs input " + detail::fmt(in_energy) + ")");
    }
    rep.components_removed.push_back("stage" + std::to_string(stage) + " removed " +
                                      detail::fmt(in_energy > 0 ? 1.0 - out_energy / in_energy : 0.0) + " of energy");
    d = std::move(e);
  }
  return {primary.with_samples(std::move(d)), std::move(rep)};
}

// ------------------------------------------------------------------ blink template

inline constexpr double kBlinkNccThreshold = 0.7;

struct BlinkEvent {
  std::size_t position = 0;  // template start index
  double score = 0.0;        // peak normalized cross-correlation
};

namespace detail {

// Pearson correlation of every template-length window against the template.
inline std::vector<double> normalized_xcorr(std::span<const double> x, std::span<const double> tmpl) {
  const std::size_t m = tmpl.size();
  const double tm = mean(tmpl);
  std::vector<double> tc(m);
  double tnorm = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    tc[k] = tmpl[k] - tm;
    tnorm += tc[k] * tc[k];
  }
  tnorm = std::sqrt(tnorm);
  std::vector<double> out(x.size() - m + 1, 0.0);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double s = 0.0, sx = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      s += x[p + k] * tc[k];
      sx += x[p + k];
      sxx += x[p + k] * x[p + k];
    }
    const double var = sxx - sx * sx / static_cast<double>(m);
    out[p] = var > 1e-300 ? s / (std::sqrt(var) * tnorm) : 0.0;
  }
  return out;
}

// Greedy non-maximum suppression: highest scores first, no two events closer
// than min_gap.
inline std::vector<BlinkEvent> pick_events(std::vector<BlinkEvent> cand, std::size_t min_gap) {
  std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  std::vector<BlinkEvent> kept;
  for (const auto& c : cand) {
    bool clear = true;
    for (const auto& k : kept) {
      const std::size_t gap = c.position > k.position ? c.position - k.position : k.position - c.position;
      if (gap < min_gap) clear = false;
    }
    if (clear) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.position < b.position; });
  return kept;
}

}  // namespace detail

// Blink events: peaks of the normalized cross-correlation above the threshold
// on any frontal channel, merged across channels.
inline std::vector<BlinkEvent> detect_blinks(const Recording& rec, const Signal& tmpl,
                                             const std::vector<std::string>& frontal_channels,
                                             double threshold = kBlinkNccThreshold) {
  if (tmpl.size() < 2 || tmpl.size() >= rec.size()) fail(ErrorKind::invalid_argument, "template must be shorter than the recording");
  bool flat = true;
  for (std::size_t i = 1; i < tmpl.size(); ++i) flat = flat && tmpl[i] == tmpl[0];
  if (flat) fail(ErrorKind::degenerate_input, "blink template is constant");
  std::vector<BlinkEvent> cand;
  for (const auto& name : frontal_channels) {
    const auto ncc = detail::normalized_xcorr(rec.channel(rec.index_of(name)).samples(), tmpl.samples());
    for (std::size_t p = 0; p < ncc.size(); ++p) {
      if (ncc[p] <= threshold) continue;
      const bool left_ok = p == 0 || ncc[p] >= ncc[p - 1];
      const bool right_ok = p + 1 == ncc.size() || ncc[p] >= ncc[p + 1];
      if (left_ok && right_ok) cand.push_back({p, ncc[p]});
    }
  }
  return detail::pick_events(std::move(cand), tmpl.size());
}

// At each detected event a least-squares scaled copy of the template (fit with
// a free offset) is subtracted from every channel, each channel with its own
// scale.
inline Denoised<Recording> remove_blink_template(const Recording& rec, const Signal& tmpl,
                                                 const std::vector<std::string>& frontal_channels,
                                                 double threshold = kBlinkNccThreshold) {
  for (const auto& name : frontal_channels) (void)rec.index_of(name);
  const auto events = detect_blinks(rec, tmpl, frontal_channels, threshold);
  const std::size_t m = tmpl.size();
  const double tm = detail::mean(tmpl.samples());
  double tvar = 0.0;
  for (std::size_t k = 0; k < m; ++k) tvar += (tmpl[k] - tm) * (tmpl[k] - tm);

  std::string names;
  for (const auto& n : frontal_channels) names += (names.empty() ? "" : ";") + n;
  DenoiseReport rep{"blink_template",
                    {{"threshold", detail::fmt(threshold)}, {"template_len", std::to_string(m)}, {"frontal", names},
                     {"events", std::to_string(events.size())}},
                    {},
                    rec.size()};
  if (events.empty()) return {rec, std::move(rep)};

  std::vector<Signal> out;
  for (std::size_t c = 0; c < rec.channel_count(); ++c) {
    std::vector<double> x = rec.channel(c).values();
    for (const auto& ev : events) {
      double cov = 0.0;
      for (std::size_t k = 0; k < m; ++k) cov += x[ev.position + k] * (tmpl[k] - tm);
      const double scale = cov / tvar;
      for (std::size_t k = 0; k < m; ++k) x[ev.position + k] -= scale * tmpl[k];
    }
    out.push_back(rec.channel(c).with_samples(std::move(x)));
  }
  for (const auto& ev : events) {
    rep.components_removed.push_back("blink@" + std::to_string(ev.position) + " ncc=" + detail::fmt(ev.score));
  }
  return {rec.with_channels(std::move(out)), std::move(rep)};
}

// ------------------------------------------------------------------ dispatch

// Parameters for every registered method, with their defaults.
struct DenoiseParams {
  int dwt_levels = 3;
  ThresholdMode dwt_mode = ThresholdMode::soft;
  int ma_width = 9;
  std::size_t ssa_window = 0;
  double var_thresh = 0.1;
  SsaCcaOptions ssa_cca{};
  KalmanConfig akf{};
  double mu = 0.05;
  int taps = 16;
  double blink_threshold = kBlinkNccThreshold;
  std::vector<std::string> frontal = {"AF7", "AF8"};

  std::map<std::string, std::string> to_map() const {
    std::string fr;
    for (const auto& f : frontal) fr += (fr.empty() ? "" : ";") + f;
    return {{"dwt_levels", std::to_string(dwt_levels)},
            {"dwt_mode", to_string(dwt_mode)},
            {"ma_width", std::to_string(ma_width)},
            {"ssa_window", std::to_string(ssa_window)},
            {"var_thresh", detail::fmt(var_thresh)},
            {"autocorr_thresh", detail::fmt(ssa_cca.autocorr_thresh)},
            {"ssa_cca_k", std::to_string(ssa_cca.components_per_channel)},
            {"akf_q", detail::fmt(akf.q)},
            {"akf_r0", detail::fmt(akf.r0)},
            {"akf_adapt_window", std::to_string(akf.adapt_window)},
            {"mu", detail::fmt(mu)},
            {"taps", std::to_string(taps)},
            {"blink_threshold", detail::fmt(blink_threshold)},
            {"frontal", fr}};
  }
};

// Side inputs some methods require.
struct DenoiseInputs {
  std::vector<Signal> references;    // cascade_lms
  std::optional<Signal> blink_template;  // blink_template
};

// Applies a registered method to a whole recording. Single-channel methods run
// channel by channel; the report lists removed components as channel:item.
inline Denoised<Recording> run_denoiser(const std::string& method_id, const Recording& rec, const DenoiseParams& p = {},
                                        const DenoiseInputs& inputs = {}) {
  if (!is_registered_method(method_id)) fail(ErrorKind::unknown_kind, "unknown method '" + method_id + "'");
  if (method_id == "identity") return {rec, DenoiseReport{"identity", {}, {}, rec.size()}};
  if (method_id == "ssa_cca") return remove_muscle_ssa_cca(rec, p.ssa_cca);
  if (method_id == "blink_template") {
    if (!inputs.blink_template) fail(ErrorKind::invalid_argument, "blink_template needs a template signal");
    return remove_blink_template(rec, *inputs.blink_template, p.frontal, p.blink_threshold);
  }
  std::vector<Signal> out;
  DenoiseReport merged{method_id, {}, {}, rec.size()};
  for (std::size_t c = 0; c < rec.channel_count(); ++c) {
    const auto& ch = rec.channel(c);
    Denoised<Signal> r = [&]() -> Denoised<Signal> {
      if (method_id == "dwt") return denoise_dwt(ch, p.dwt_levels, p.dwt_mode);
      if (method_id == "emd_maf") return denoise_emd_maf(ch, p.ma_width);
      if (method_id == "ssa_motion") return remove_motion_ssa(ch, p.ssa_window, p.var_thresh);
      if (method_id == "akf") return adaptive_kalman_denoise(ch, p.akf);
      return cascade_lms(ch, inputs.references, p.mu, p.taps);
    }();
    if (c == 0) merged.params = r.second.params;
    for (auto& item : r.second.components_removed) merged.components_removed.push_back(rec.names()[c] + ":" + item);
    out.push_back(std::move(r.first));
  }
  return {rec.with_channels(std::move(out)), std::move(merged)};
}

}  // namespace eegscrub
