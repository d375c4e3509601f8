#pragma once

#include "eegscrub/linalg.hpp"
#include "eegscrub/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace eegscrub {

// Canonical correlation analysis between two multichannel series given as
// channels x samples matrices.
struct CcaResult {
  Matrix wx;                          // p x d projection weights for x
  Matrix wy;                          // q x d projection weights for y
  std::vector<double> correlations;   // d values in [0, 1], nonincreasing
  Matrix sources;                     // d x N canonical variates of x (centered)
  Matrix x_mixing;                    // p x d; for p == d, centered x = x_mixing * sources
  std::vector<double> x_mean;         // per-channel means removed from x
  double ridge = 0.0;                 // ridge added to the x covariance diagonal
};

namespace detail {

inline std::vector<double> center_rows(Matrix& m) {
  std::vector<double> means(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c);
    means[r] = s / static_cast<double>(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) -= means[r];
  }
  return means;
}

// Divides each (centered) row by its standard deviation; constant rows are left
// untouched. Returns the divisors.
inline std::vector<double> standardize_rows(Matrix& m) {
  std::vector<double> sd(m.rows(), 1.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * m(r, c);
    s = std::sqrt(s / static_cast<double>(m.cols()));
    if (s > 0.0) {
      sd[r] = s;
      for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) /= s;
    }
  }
  return sd;
}

inline Matrix cross_cov(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  const auto n = static_cast<double>(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.row_ptr(j);
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) s += ai[t] * bj[t];
      out(i, j) = s / n;
    }
  }
  return out;
}

// Ridge-regularized covariance powers C^(-1/2) and C^(1/2).
struct Whitener {
  Matrix inv_sqrt;
  Matrix sqrt;
  double ridge = 0.0;
};

inline Whitener whitener(Matrix cov, double ridge_rel, const char* side) {
  const std::size_t p = cov.rows();
  double trace = 0.0;
  for (std::size_t i = 0; i < p; ++i) trace += cov(i, i);
  const double avg = trace / static_cast<double>(p);
  if (!(avg > 0.0) || !std::isfinite(avg)) {
    fail(ErrorKind::numeric_degeneracy, std::string("covariance of ") + side + " has zero trace");
  }
  const double ridge = ridge_rel * avg;
  for (std::size_t i = 0; i < p; ++i) cov(i, i) += ridge;
  const auto eig = spd_eigen(cov);
  if (!(eig.values.back() > 0.0)) fail(ErrorKind::numeric_degeneracy, std::string("covariance of ") + side + " is singular");
  Whitener w{Matrix(p, p), Matrix(p, p), ridge};
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double a = 0.0, b = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        const double vv = eig.vectors(i, k) * eig.vectors(j, k);
        a += vv / std::sqrt(eig.values[k]);
        b += vv * std::sqrt(eig.values[k]);
      }
      w.inv_sqrt(i, j) = a;
      w.sqrt(i, j) = b;
    }
  }
  return w;
}

}  // namespace detail

// Whitening + SVD formulation. Channels are first scaled to unit variance, so
// the ridge (ridge_rel times the average variance, i.e. ridge_rel itself) does
// not depend on channel scale and neither do the correlations.
inline CcaResult cca(Matrix x, Matrix y, double ridge_rel = 1e-8) {
  const std::size_t p = x.rows(), q = y.rows(), n = x.cols();
  if (p == 0 || q == 0) fail(ErrorKind::invalid_argument, "CCA needs at least one channel per side");
  if (y.cols() != n) fail(ErrorKind::shape_mismatch, "CCA inputs differ in sample count");
  if (n <= std::max(p, q)) fail(ErrorKind::invalid_argument, "CCA needs more samples than channels");

  CcaResult r;
  r.x_mean = detail::center_rows(x);
  detail::center_rows(y);
  const auto x_scale = detail::standardize_rows(x);
  const auto y_scale = detail::standardize_rows(y);
  const auto wxh = detail::whitener(detail::cross_cov(x, x), ridge_rel, "x");
  const auto wyh = detail::whitener(detail::cross_cov(y, y), ridge_rel, "y");
  r.ridge = wxh.ridge;
  const Matrix m = wxh.inv_sqrt * detail::cross_cov(x, y) * wyh.inv_sqrt;  // p x q

  Matrix ux, uy;
  std::vector<double> s;
  if (p >= q) {
    auto svd = jacobi_svd(m);
    ux = svd.u, uy = svd.v, s = svd.s;
  } else {
    auto svd = jacobi_svd(m.transposed());
    ux = svd.v, uy = svd.u, s = svd.s;
  }
  for (double& c : s) c = std::clamp(c, 0.0, 1.0);
  r.correlations = s;
  r.wx = wxh.inv_sqrt * ux;
  r.wy = wyh.inv_sqrt * uy;
  r.x_mixing = wxh.sqrt * ux;
  r.sources = r.wx.transposed() * x;
  // Express weights and mixing in the caller's channel units.
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < r.wx.cols(); ++k) {
      r.wx(i, k) /= x_scale[i];
      r.x_mixing(i, k) *= x_scale[i];
    }
  }
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t k = 0; k < r.wy.cols(); ++k) r.wy(i, k) /= y_scale[i];
  return r;
}

namespace detail {

inline Matrix to_matrix(const Recording& rec) {
  Matrix m(rec.channel_count(), rec.size());
  for (std::size_t c = 0; c < rec.channel_count(); ++c) {
    const auto& v = rec.channel(c).values();
    std::copy(v.begin(), v.end(), m.row_ptr(c));
  }
  return m;
}

}  // namespace detail

inline CcaResult cca(const Recording& x, const Recording& y, double ridge_rel = 1e-8) {
  return cca(detail::to_matrix(x), detail::to_matrix(y), ridge_rel);
}

}  // namespace eegscrub
