#pragma once
//
// Tensor algebra of the p-Laplacian: the flux map A, the map V, the shifted
// power functions phi_{p,a}, and sample-based checkers for the algebraic
// equivalences relating them.
//

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace plap {

/// Integrability exponent p in (1, inf) together with its conjugate p'.
class Exponent {
 public:
  explicit Exponent(double p) : p_(p) {
    if (!(p > 1.0) || !std::isfinite(p))
      throw std::invalid_argument("Exponent: p must lie in (1, inf), got " + std::to_string(p));
    pprime_ = p / (p - 1.0);
  }

  double p() const noexcept { return p_; }
  double pprime() const noexcept { return pprime_; }
  /// min{p', 2}, the integrability of the flux oscillation in the CZ estimates.
  double flux_q() const noexcept { return std::min(pprime_, 2.0); }

 private:
  double p_;
  double pprime_;
};

/// Dense N x n matrix with small fixed capacity, Frobenius geometry.
class Tensor {
 public:
  static constexpr int kMaxEntries = 16;

  Tensor() = default;

  Tensor(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1 || rows * cols > kMaxEntries)
      throw std::invalid_argument("Tensor: unsupported shape");
  }

  Tensor(int rows, int cols, std::initializer_list<double> values) : Tensor(rows, cols) {
    if (static_cast<int>(values.size()) != rows * cols)
      throw std::invalid_argument("Tensor: entry count does not match shape");
    std::copy(values.begin(), values.end(), data_.begin());
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int size() const noexcept { return rows_ * cols_; }

  double& operator()(int r, int c) noexcept { return data_[r * cols_ + c]; }
  double operator()(int r, int c) const noexcept { return data_[r * cols_ + c]; }
  double& operator[](int k) noexcept { return data_[k]; }
  double operator[](int k) const noexcept { return data_[k]; }

  std::span<double> entries() noexcept { return {data_.data(), static_cast<std::size_t>(size())}; }
  std::span<const double> entries() const noexcept {
    return {data_.data(), static_cast<std::size_t>(size())};
  }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (int k = 0; k < size(); ++k) s += data_[k] * data_[k];
    return s;
  }

  /// Frobenius norm, computed with scaling so that entries near the
  /// overflow or underflow threshold do not spoil it.
  double norm() const noexcept {
    double scale = 0.0;
    for (int k = 0; k < size(); ++k) scale = std::max(scale, std::abs(data_[k]));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double s = 0.0;
    for (int k = 0; k < size(); ++k) {
      const double v = data_[k] / scale;
      s += v * v;
    }
    return scale * std::sqrt(s);
  }

  bool is_zero() const noexcept {
    for (int k = 0; k < size(); ++k)
      if (data_[k] != 0.0) return false;
    return true;
  }

  bool same_shape(const Tensor& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  Tensor& operator+=(const Tensor& o) {
    check_shape(o);
    for (int k = 0; k < size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    check_shape(o);
    for (int k = 0; k < size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Tensor& operator*=(double s) noexcept {
    for (int k = 0; k < size(); ++k) data_[k] *= s;
    return *this;
  }

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }
  friend Tensor operator-(Tensor a) { return a *= -1.0; }

  friend double dot(const Tensor& a, const Tensor& b) {
    a.check_shape(b);
    double s = 0.0;
    for (int k = 0; k < a.size(); ++k) s += a.data_[k] * b.data_[k];
    return s;
  }

 private:
  void check_shape(const Tensor& o) const {
    if (!same_shape(o)) throw std::invalid_argument("Tensor: shape mismatch");
  }

  int rows_ = 1;
  int cols_ = 1;
  std::array<double, kMaxEntries> data_{};
};

namespace detail {

// t^e for t >= 0 with the continuous extension 0^e = 0 (e > 0) and 0^0 = 1.
inline double pow_nonneg(double t, double e) {
  if (t == 0.0) return e == 0.0 ? 1.0 : (e > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return std::exp(e * std::log(t));
}

// |P|^e P with 0 mapped to 0.
inline Tensor radial_power(const Tensor& P, double e) {
  const double n = P.norm();
  if (n == 0.0) return Tensor(P.rows(), P.cols());
  return P * std::exp(e * std::log(n));
}

}  // namespace detail

/// The shifted power function phi_{p,a}(t) = (a + t)^{p-2} t^2.
struct ShiftedPower {
  double p;
  double a;

  ShiftedPower(double p_, double a_) : p(p_), a(a_) {
    if (!(p_ > 1.0)) throw std::invalid_argument("ShiftedPower: p must exceed 1");
    if (!(a_ >= 0.0)) throw std::invalid_argument("ShiftedPower: shift must be nonnegative");
  }
  ShiftedPower(const Exponent& e, double a_) : ShiftedPower(e.p(), a_) {}
};

inline double phi(const ShiftedPower& sp, double t) {
  if (!(t >= 0.0)) throw std::domain_error("phi: argument must be nonnegative");
  if (t == 0.0) return 0.0;
  return detail::pow_nonneg(sp.a + t, sp.p - 2.0) * t * t;
}

inline double phi_prime(const ShiftedPower& sp, double t) {
  if (!(t >= 0.0)) throw std::domain_error("phi_prime: argument must be nonnegative");
  if (t == 0.0) return 0.0;
  const double s = sp.a + t;
  const double base = detail::pow_nonneg(s, sp.p - 2.0);
  return base * t * ((sp.p - 2.0) * t / s + 2.0);
}

/// A(P) = |P|^{p-2} P, the flux of the p-Laplacian.
inline Tensor a_map(const Exponent& p, const Tensor& P) {
  return detail::radial_power(P, p.p() - 2.0);
}

/// V(P) = |P|^{(p-2)/2} P.
inline Tensor v_map(const Exponent& p, const Tensor& P) {
  return detail::radial_power(P, 0.5 * (p.p() - 2.0));
}

/// Inverse of the flux map: the unique P with A(P) = W.
inline Tensor a_inverse(const Exponent& p, const Tensor& W) {
  return detail::radial_power(W, (2.0 - p.p()) / (p.p() - 1.0));
}

/// The five mutually equivalent quantities of the monotonicity relation for
/// A, plus |A(P) - A(Q)| for the companion flux-difference relation.
struct EquivalenceSample {
  double inner;          // (A(P) - A(Q)) . (P - Q)
  double v_diff_sq;      // |V(P) - V(Q)|^2
  double weighted_sq;    // (|P| + |Q|)^{p-2} |P - Q|^2
  double phi_shifted;    // phi_{p,|Q|}(|P - Q|)
  double phi_conjugate;  // phi_{p',|Q|^{p-1}}(|A(P) - A(Q)|)
  double a_diff;         // |A(P) - A(Q)|

  std::array<double, 5> five() const {
    return {inner, v_diff_sq, weighted_sq, phi_shifted, phi_conjugate};
  }
};

inline EquivalenceSample equivalence_ratios(const Exponent& p, const Tensor& P, const Tensor& Q) {
  if (P.is_zero() && Q.is_zero())
    throw std::invalid_argument("equivalence_ratios: P = Q = 0 gives only 0/0 ratios");
  const Tensor aP = a_map(p, P);
  const Tensor aQ = a_map(p, Q);
  const Tensor dA = aP - aQ;
  const Tensor dP = P - Q;
  const double nP = P.norm();
  const double nQ = Q.norm();
  const double ndP = dP.norm();

  EquivalenceSample s{};
  s.inner = dot(dA, dP);
  s.v_diff_sq = (v_map(p, P) - v_map(p, Q)).squared_norm();
  s.weighted_sq = detail::pow_nonneg(nP + nQ, p.p() - 2.0) * ndP * ndP;
  s.phi_shifted = phi(ShiftedPower(p.p(), nQ), ndP);
  s.a_diff = dA.norm();
  s.phi_conjugate = phi(ShiftedPower(p.pprime(), detail::pow_nonneg(nQ, p.p() - 1.0)), s.a_diff);
  return s;
}

/// Pieces of the Young-type inequality t s <= delta phi_{p,a}(t) + c phi_{p',a^{p-1}}(s).
struct YoungBoundSample {
  double lhs;              // t s
  double delta_phi;        // delta * phi_{p,a}(t)
  double conjugate_term;   // phi_{p',a^{p-1}}(s), the factor multiplying c

  /// Smallest c making this sample satisfy the inequality.
  double required_constant() const {
    const double excess = std::max(0.0, lhs - delta_phi);
    if (excess == 0.0) return 0.0;
    return conjugate_term > 0.0 ? excess / conjugate_term : std::numeric_limits<double>::infinity();
  }
};

inline YoungBoundSample young_bound_check(const Exponent& p, double a, double delta, double t,
                                          double s) {
  if (!(t >= 0.0) || !(s >= 0.0)) throw std::domain_error("young_bound_check: t, s must be >= 0");
  if (!(delta > 0.0)) throw std::domain_error("young_bound_check: delta must be positive");
  YoungBoundSample out{};
  out.lhs = t * s;
  out.delta_phi = delta * phi(ShiftedPower(p.p(), a), t);
  out.conjugate_term = phi(ShiftedPower(p.pprime(), detail::pow_nonneg(a, p.p() - 1.0)), s);
  return out;
}

/// Pieces of the shift change inequality
///   phi_{p',|P|^{p-1}}(t) <= c gamma^{1-max{p,2}} phi_{p',|Q|^{p-1}}(t) + gamma |V(P) - V(Q)|^2.
struct ShiftChangeSample {
  double lhs;
  double shifted_term;  // gamma^{1-max{p,2}} phi_{p',|Q|^{p-1}}(t)
  double v_term;        // gamma |V(P) - V(Q)|^2

  double required_constant() const {
    const double excess = std::max(0.0, lhs - v_term);
    if (excess == 0.0) return 0.0;
    return shifted_term > 0.0 ? excess / shifted_term : std::numeric_limits<double>::infinity();
  }
};

inline ShiftChangeSample shift_change_check(const Exponent& p, const Tensor& P, const Tensor& Q,
                                            double t, double gamma) {
  if (!(t >= 0.0)) throw std::domain_error("shift_change_check: t must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::domain_error("shift_change_check: gamma in (0,1]");
  const double shiftP = detail::pow_nonneg(P.norm(), p.p() - 1.0);
  const double shiftQ = detail::pow_nonneg(Q.norm(), p.p() - 1.0);
  ShiftChangeSample out{};
  out.lhs = phi(ShiftedPower(p.pprime(), shiftP), t);
  out.shifted_term = std::pow(gamma, 1.0 - std::max(p.p(), 2.0)) *
                     phi(ShiftedPower(p.pprime(), shiftQ), t);
  out.v_term = gamma * (v_map(p, P) - v_map(p, Q)).squared_norm();
  return out;
}

/// Running fit of an equivalence band [1/C, C] from sampled positive quantities.
class EquivalenceBand {
 public:
  /// Quantities below this floor are treated as 0/0 and skipped.
  static constexpr double kFloor = 1e-300;

  void add(std::span<const double> values) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi < kFloor) {
      ++skipped_;
      return;
    }
    ++count_;
    if (lo <= 0.0) {
      band_ = std::numeric_limits<double>::infinity();
      return;
    }
    band_ = std::max(band_, hi / lo);
  }

  void add_ratio(double num, double den) {
    const std::array<double, 2> v{num, den};
    add(v);
  }

  /// Smallest C with every sampled ratio inside [1/C, C].
  double constant() const noexcept { return band_; }
  long count() const noexcept { return count_; }
  long skipped() const noexcept { return skipped_; }

 private:
  double band_ = 1.0;
  long count_ = 0;
  long skipped_ = 0;
};

}  // namespace plap
