#pragma once

#include "eegscrub/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace eegscrub {

struct EmdOptions {
  int max_imfs = 10;
  double sift_tol = 0.2;  // Cauchy SD threshold
  int max_sifts = 50;
};

// Intrinsic mode functions, highest frequency first. Sum of imfs + residual
// reproduces the decomposed signal.
struct ImfSet {
  std::vector<Signal> imfs;
  Signal residual;
  std::vector<int> sift_counts;  // sifting iterations spent on each IMF

  std::vector<double> reconstruct() const {
    std::vector<double> out = residual.values();
    for (const auto& imf : imfs)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += imf[i];
    return out;
  }
};

namespace detail {

struct Extrema {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

// Interior local extrema. A flat run that is a peak (or trough) on both sides
// contributes its middle sample.
inline Extrema find_extrema(std::span<const double> x) {
  Extrema e;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] == x[i - 1]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j + 1 >= n) break;
    const bool up_before = x[i] > x[i - 1];
    const bool down_after = x[j + 1] < x[j];
    if (up_before && down_after) e.maxima.push_back((i + j) / 2);
    if (!up_before && !down_after) e.minima.push_back((i + j) / 2);
    i = j + 1;
  }
  return e;
}

inline std::size_t zero_crossings(std::span<const double> x) {
  std::size_t count = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if ((x[i - 1] < 0.0 && x[i] >= 0.0) || (x[i - 1] >= 0.0 && x[i] < 0.0)) ++count;
  }
  return count;
}

// Natural cubic spline through (t, y), t strictly increasing, evaluated at the
// integer grid 0..n-1.
inline std::vector<double> natural_spline(const std::vector<double>& t, const std::vector<double>& y, std::size_t n) {
  const std::size_t m = t.size();
  std::vector<double> out(n);
  if (m == 1) {
    std::fill(out.begin(), out.end(), y[0]);
    return out;
  }
  std::vector<double> h(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) h[i] = t[i + 1] - t[i];
  // Second derivatives; natural end conditions M_0 = M_{m-1} = 0.
  std::vector<double> mm(m, 0.0);
  if (m > 2) {
    const std::size_t k = m - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
      diag[i] = 2.0 * (h[i] + h[i + 1]);
      upper[i] = h[i + 1];
      rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
    }
    for (std::size_t i = 1; i < k; ++i) {
      const double w = h[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    mm[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) mm[i + 1] = (rhs[i] - upper[i] * mm[i + 2]) / diag[i];
  }
  std::size_t seg = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double x = static_cast<double>(p);
    while (seg + 2 < m && x > t[seg + 1]) ++seg;
    const double a = t[seg + 1] - x;
    const double b = x - t[seg];
    const double hs = h[seg];
    out[p] = (mm[seg] * a * a * a + mm[seg + 1] * b * b * b) / (6.0 * hs) +
             (y[seg] / hs - mm[seg] * hs / 6.0) * a + (y[seg + 1] / hs - mm[seg + 1] * hs / 6.0) * b;
  }
  return out;
}

// Envelope through the given extrema, with up to two extrema mirrored about
// each end of the record.
inline std::vector<double> envelope(std::span<const double> x, const std::vector<std::size_t>& idx) {
  const std::size_t n = x.size();
  const double last = static_cast<double>(n - 1);
  const std::size_t k = std::min<std::size_t>(2, idx.size());
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < k; ++i) pts.emplace_back(-static_cast<double>(idx[i]), x[idx[i]]);
  for (auto i : idx) pts.emplace_back(static_cast<double>(i), x[i]);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = idx[idx.size() - 1 - i];
    pts.emplace_back(2.0 * last - static_cast<double>(j), x[j]);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> t, y;
  for (const auto& [pt, pv] : pts) {
    if (!t.empty() && pt == t.back()) continue;
    t.push_back(pt);
    y.push_back(pv);
  }
  return natural_spline(t, y, n);
}

inline bool has_oscillation(const Extrema& e) { return !e.maxima.empty() && !e.minima.empty(); }

}  // namespace detail

// Empirical mode decomposition by envelope-mean sifting. Sifting for one IMF
// stops once the Cauchy SD drops below sift_tol and extrema and zero-crossing
// counts differ by at most one, or after max_sifts iterations. A signal without
// both a maximum and a minimum yields no IMFs.
inline ImfSet emd(const Signal& signal, const EmdOptions& opt = {}) {
  if (signal.size() < 8) fail(ErrorKind::too_short, "EMD needs at least 8 samples");
  if (opt.max_imfs < 0 || opt.max_sifts < 1 || !(opt.sift_tol > 0.0)) fail(ErrorKind::invalid_argument, "bad EMD options");
  const std::size_t n = signal.size();
  std::vector<double> residual = signal.values();
  std::vector<Signal> imfs;
  std::vector<int> sifts;

  while (static_cast<int>(imfs.size()) < opt.max_imfs) {
    if (!detail::has_oscillation(detail::find_extrema(residual))) break;
    std::vector<double> h = residual;
    int iter = 0;
    while (iter < opt.max_sifts) {
      const auto ext = detail::find_extrema(h);
      if (!detail::has_oscillation(ext)) break;
      const auto upper = detail::envelope(h, ext.maxima);
      const auto lower = detail::envelope(h, ext.minima);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double m = 0.5 * (upper[i] + lower[i]);
        num += m * m;
        den += h[i] * h[i];
        h[i] -= m;
      }
      ++iter;
      const double sd = den > 0.0 ? num / den : 0.0;
      if (sd < opt.sift_tol) {
        const auto e2 = detail::find_extrema(h);
        const auto n_ext = static_cast<long>(e2.maxima.size() + e2.minima.size());
        const auto n_zc = static_cast<long>(detail::zero_crossings(h));
        if (std::abs(n_ext - n_zc) <= 1) break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) residual[i] -= h[i];
    imfs.push_back(signal.with_samples(std::move(h)));
    sifts.push_back(iter);
  }
  return ImfSet{std::move(imfs), signal.with_samples(std::move(residual)), std::move(sifts)};
}

inline ImfSet emd(const Signal& signal, int max_imfs, double sift_tol) {
  EmdOptions o;
  o.max_imfs = max_imfs;
  o.sift_tol = sift_tol;
  return emd(signal, o);
}

}  // namespace eegscrub
