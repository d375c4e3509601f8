#pragma once

#include "eegscrub/linalg.hpp"
#include "eegscrub/signal.hpp"

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace eegscrub {

// Singular spectrum analysis of one series: singular values of the L x K
// trajectory (Hankel) matrix and the diagonal-averaged elementary component of
// every singular triple.
struct SsaModel {
  std::size_t window_len = 0;
  std::vector<double> singular_values;  // nonincreasing
  std::vector<Signal> elementary_components;

  // Share of sum(sigma^2) carried by component i.
  double mass_fraction(std::size_t i) const {
    double total = 0.0;
    for (double s : singular_values) total += s * s;
    return total > 0.0 ? singular_values.at(i) * singular_values.at(i) / total : 0.0;
  }
  // s_i / sum(s), the unsquared share.
  double singular_value_fraction(std::size_t i) const {
    double total = 0.0;
    for (double s : singular_values) total += s;
    return total > 0.0 ? singular_values.at(i) / total : 0.0;
  }
};

inline std::size_t ssa_default_window(std::size_t n) { return std::min<std::size_t>(n / 2, 128); }

inline SsaModel ssa_decompose(const Signal& signal, std::size_t window_len) {
  const std::size_t n = signal.size();
  const std::size_t l = window_len;
  if (l < 2 || l > n / 2) {
    fail(ErrorKind::invalid_argument, "SSA window " + std::to_string(l) + " outside [2, " + std::to_string(n / 2) + "]");
  }
  const std::size_t k = n - l + 1;
  const auto& x = signal.values();

  // Work on the transpose (K x L) so the Jacobi sweep rotates only L columns.
  Matrix traj(k, l);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < l; ++c) traj(r, c) = x[r + c];
  const auto svd = jacobi_svd(traj);

  std::vector<double> counts(n, 0.0);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < k; ++j) counts[i + j] += 1.0;

  SsaModel model;
  model.window_len = l;
  model.singular_values = svd.s;
  std::vector<double> acc(n);
  for (std::size_t comp = 0; comp < l; ++comp) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const double sigma = svd.s[comp];
    if (sigma > 0.0) {
      for (std::size_t i = 0; i < l; ++i) {
        const double a = sigma * svd.v(i, comp);
        for (std::size_t j = 0; j < k; ++j) acc[i + j] += a * svd.u(j, comp);
      }
      for (std::size_t t = 0; t < n; ++t) acc[t] /= counts[t];
    }
    model.elementary_components.push_back(signal.with_samples(acc));
  }
  return model;
}

inline SsaModel ssa_decompose(const Signal& signal) { return ssa_decompose(signal, ssa_default_window(signal.size())); }

// Sum of the selected elementary components.
inline Signal ssa_reconstruct(const SsaModel& model, const std::set<std::size_t>& group) {
  if (model.elementary_components.empty()) fail(ErrorKind::invalid_argument, "empty SSA model");
  const auto& first = model.elementary_components.front();
  std::vector<double> out(first.size(), 0.0);
  for (auto idx : group) {
    if (idx >= model.elementary_components.size()) {
      fail(ErrorKind::invalid_argument, "SSA component index " + std::to_string(idx) + " out of range");
    }
    const auto& c = model.elementary_components[idx];
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += c[t];
  }
  return first.with_samples(std::move(out));
}

inline Signal ssa_reconstruct_all(const SsaModel& model) {
  std::set<std::size_t> all;
  for (std::size_t i = 0; i < model.elementary_components.size(); ++i) all.insert(i);
  return ssa_reconstruct(model, all);
}

}  // namespace eegscrub
