#pragma once
//
// Compressed sparse row matrices and Jacobi-preconditioned conjugate
// gradients restricted to a set of free unknowns.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace plap {

/// Symmetric sparse matrix with a fixed pattern; values are reassembled in place.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Builds the pattern from per-row column lists (duplicates allowed).
  explicit CsrMatrix(std::vector<std::vector<int>> rows) {
    const std::size_t n = rows.size();
    row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = rows[i];
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      row_ptr_[i + 1] = row_ptr_[i] + static_cast<int>(r.size());
    }
    cols_.reserve(row_ptr_[n]);
    for (const auto& r : rows) cols_.insert(cols_.end(), r.begin(), r.end());
    values_.assign(cols_.size(), 0.0);
  }

  int rows() const noexcept { return static_cast<int>(row_ptr_.size()) - 1; }
  std::size_t nonzeros() const noexcept { return cols_.size(); }

  void zero() { std::fill(values_.begin(), values_.end(), 0.0); }

  /// Position of (i, j) in the value array; the entry must be in the pattern.
  int find(int i, int j) const {
    const auto b = cols_.begin() + row_ptr_[i];
    const auto e = cols_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j) throw std::out_of_range("CsrMatrix::find: entry outside the pattern");
    return static_cast<int>(it - cols_.begin());
  }

  double& value_at(int slot) { return values_[slot]; }
  double value_at(int slot) const { return values_[slot]; }

  double diagonal(int i) const { return values_[find(i, i)]; }

  void multiply(std::span<const double> x, std::span<double> y) const {
    const int n = rows();
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
      y[i] = s;
    }
  }

  template <class Fn>
  void for_each_in_row(int i, Fn&& fn) const {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) fn(cols_[k], values_[k]);
  }

 private:
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Solves A_FF x_F = b_F - A_FC x_C where F are rows with free[i] set and C
/// the fixed rows. x holds the fixed values and the initial guess on entry.
inline CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                                   const std::vector<char>& free, double rel_tol, int max_iter) {
  const int n = a.rows();
  std::vector<double> r(n), z(n), p(n), ap(n), inv_diag(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (free[i]) {
      const double d = a.diagonal(i);
      inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
    }

  a.multiply(x, ap);
  double bnorm = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!free[i]) {
      r[i] = 0.0;
      continue;
    }
    r[i] = b[i] - ap[i];
    // rhs of the reduced system includes the lifting of fixed values
    double lift = 0.0;
    a.for_each_in_row(i, [&](int j, double v) {
      if (!free[j]) lift += v * x[j];
    });
    bnorm += (b[i] - lift) * (b[i] - lift);
  }
  bnorm = std::sqrt(bnorm);

  CgResult res;
  auto norm = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v[i] * v[i];
    return std::sqrt(s);
  };
  double rnorm = norm(r);
  if (bnorm == 0.0) {
    if (rnorm == 0.0) {
      res.converged = true;
      return res;
    }
    bnorm = 1.0;
  }
  if (rnorm <= rel_tol * bnorm) {
    res.converged = true;
    res.relative_residual = rnorm / bnorm;
    return res;
  }

  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];

  for (int it = 1; it <= max_iter; ++it) {
    a.multiply(p, ap);
    double pap = 0.0;
    for (int i = 0; i < n; ++i)
      if (free[i]) pap += p[i] * ap[i];
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i)
      if (free[i]) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
    rnorm = norm(r);
    res.iterations = it;
    if (rnorm <= rel_tol * bnorm) {
      res.converged = true;
      break;
    }
    double rz_new = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i] = inv_diag[i] * r[i];
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = free[i] ? z[i] + beta * p[i] : 0.0;
  }
  res.relative_residual = rnorm / bnorm;
  return res;
}

}  // namespace plap
