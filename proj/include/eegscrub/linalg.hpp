#pragma once

#include "eegscrub/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace eegscrub {

// Dense row-major matrix. Deliberately minimal: the decompositions here work on
// matrices of at most a few hundred columns.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
  const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::vector<double> row(std::size_t r) const { return {row_ptr(r), row_ptr(r) + cols_}; }
  std::vector<double> col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::shape_mismatch, "matrix product dimensions disagree");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row_ptr(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * brow[j];
    }
  }
  return out;
}

// Thin SVD A = U diag(s) V^T of an m x n matrix with m >= n.
struct SvdResult {
  Matrix u;               // m x n, orthonormal columns (zero column for a zero singular value)
  std::vector<double> s;  // n values, nonincreasing
  Matrix v;               // n x n orthogonal
  int sweeps = 0;
};

inline SvdResult jacobi_svd(const Matrix& a, double tol = 1e-12, int max_sweeps = 80);

namespace detail {

// Tall matrices: A = QR by Householder, then A's SVD is (Q U_R) S V^T with the
// rotations done on the small n x n factor.
inline SvdResult qr_preconditioned_svd(const Matrix& a, double tol, int max_sweeps) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cols[j][i] = a(i, j);

  std::vector<std::vector<double>> refl(n);  // unit Householder vectors, rows j..m-1
  for (std::size_t j = 0; j < n; ++j) {
    auto& cj = cols[j];
    double norm = 0.0;
    for (std::size_t i = j; i < m; ++i) norm += cj[i] * cj[i];
    norm = std::sqrt(norm);
    std::vector<double> v(cj.begin() + static_cast<std::ptrdiff_t>(j), cj.end());
    if (norm == 0.0) {
      refl[j].assign(m - j, 0.0);
      continue;
    }
    const double alpha = cj[j] > 0.0 ? -norm : norm;
    v[0] -= alpha;
    double vn = 0.0;
    for (double x : v) vn += x * x;
    vn = std::sqrt(vn);
    if (vn > 0.0)
      for (auto& x : v) x /= vn;
    for (std::size_t k = j; k < n; ++k) {
      auto& ck = cols[k];
      double dot = 0.0;
      for (std::size_t i = j; i < m; ++i) dot += v[i - j] * ck[i];
      for (std::size_t i = j; i < m; ++i) ck[i] -= 2.0 * dot * v[i - j];
    }
    refl[j] = std::move(v);
  }

  Matrix r(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) r(i, j) = cols[j][i];
  auto small = jacobi_svd(r, tol, max_sweeps);

  // U = Q U_R, applying the reflectors in reverse to [U_R; 0].
  std::vector<std::vector<double>> ucols(n, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) ucols[k][i] = small.u(i, k);
  for (std::size_t jj = n; jj-- > 0;) {
    const auto& v = refl[jj];
    for (auto& uk : ucols) {
      double dot = 0.0;
      for (std::size_t i = jj; i < m; ++i) dot += v[i - jj] * uk[i];
      if (dot == 0.0) continue;
      for (std::size_t i = jj; i < m; ++i) uk[i] -= 2.0 * dot * v[i - jj];
    }
  }
  SvdResult out{Matrix(m, n), std::move(small.s), std::move(small.v), small.sweeps};
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < m; ++i) out.u(i, k) = ucols[k][i];
  return out;
}

}  // namespace detail

// One-sided (Hestenes) Jacobi SVD. Column pairs are rotated until every pair is
// orthogonal to within `tol` relative to the product of their norms.
inline SvdResult jacobi_svd(const Matrix& a, double tol, int max_sweeps) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) fail(ErrorKind::shape_mismatch, "jacobi_svd expects rows >= cols");
  if (m > 2 * n) return detail::qr_preconditioned_svd(a, tol, max_sweeps);

  // Column-major working copies.
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cols[j][i] = a(i, j);
  std::vector<std::vector<double>> vcols(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) vcols[j][j] = 1.0;

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto& cp = cols[p];
        auto& cq = cols[q];
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = cp[i], y = cq[i];
          cp[i] = c * x - s * y;
          cq[i] = s * x + c * y;
        }
        auto& vp = vcols[p];
        auto& vq = vcols[q];
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double ss = 0.0;
    for (double x : cols[j]) ss += x * x;
    norms[j] = std::sqrt(ss);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SvdResult r{Matrix(m, n), std::vector<double>(n), Matrix(n, n), sweep};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    r.s[k] = norms[j];
    if (norms[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) r.u(i, k) = cols[j][i] / norms[j];
    }
    for (std::size_t i = 0; i < n; ++i) r.v(i, k) = vcols[j][i];
  }
  // Zero singular values leave zero columns in U; complete them to an
  // orthonormal set so U is always a valid basis.
  for (std::size_t k = 0; k < n; ++k) {
    if (r.s[k] > 0.0) continue;
    for (std::size_t e = 0; e < m; ++e) {
      std::vector<double> cand(m, 0.0);
      cand[e] = 1.0;
      for (std::size_t q = 0; q < n; ++q) {
        if (q == k || (r.s[q] == 0.0 && q > k)) continue;
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += cand[i] * r.u(i, q);
        for (std::size_t i = 0; i < m; ++i) cand[i] -= dot * r.u(i, q);
      }
      double nn = 0.0;
      for (double c : cand) nn += c * c;
      if (nn > 1e-6) {
        nn = std::sqrt(nn);
        for (std::size_t i = 0; i < m; ++i) r.u(i, k) = cand[i] / nn;
        break;
      }
    }
  }
  return r;
}

// Eigen-decomposition of a symmetric positive semidefinite matrix via the SVD
// (for such matrices the two coincide). Eigenvalues nonincreasing.
struct SymEigen {
  std::vector<double> values;
  Matrix vectors;  // columns are eigenvectors
};

inline SymEigen spd_eigen(const Matrix& s) {
  if (s.rows() != s.cols()) fail(ErrorKind::shape_mismatch, "spd_eigen expects a square matrix");
  auto svd = jacobi_svd(s);
  return {svd.s, svd.v};
}

}  // namespace eegscrub
