#pragma once
//
// Campanato, BMO and VMO seminorms on element fields, moduli of continuity
// with their Dini (varpi) and zeta transforms, Hoelder seminorms and the
// dyadic oscillation potential.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/maximal.hpp"
#include "plap/mesh.hpp"
#include "plap/nfunc.hpp"

namespace plap {

/// Modulus of continuity omega with a doubling certificate
/// omega(r) <= c_omega * rho^{-beta} * omega(r rho) for rho in (0, 1].
class Modulus {
 public:
  enum class Family { power, log_inverse, constant, dini_log };

  /// r^beta.
  static Modulus power(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("Modulus::power: beta must be positive");
    Modulus m(Family::power);
    m.beta_ = beta;
    m.beta_cert = beta;
    return m;
  }

  /// log(scale / r)^{-sigma}, for r < scale.
  static Modulus log_inverse(double sigma, double scale) {
    if (!(sigma > 0.0) || !(scale > 0.0)) throw std::invalid_argument("Modulus::log_inverse: need sigma, scale > 0");
    Modulus m(Family::log_inverse);
    m.sigma_ = sigma;
    m.scale_ = scale;
    m.beta_cert = sigma;
    return m;
  }

  static Modulus constant() {
    Modulus m(Family::constant);
    m.beta_cert = 1.0;
    return m;
  }

  /// 1 / log(scale / r), for r < scale.
  static Modulus dini_log(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("Modulus::dini_log: scale must be positive");
    Modulus m(Family::dini_log);
    m.sigma_ = 1.0;
    m.scale_ = scale;
    m.beta_cert = 1.0;
    return m;
  }

  Family family() const noexcept { return family_; }
  double beta() const noexcept { return beta_; }
  double sigma() const noexcept { return sigma_; }
  double scale() const noexcept { return scale_; }

  /// Radii strictly below this bound are in the domain.
  double domain_max() const noexcept {
    return family_ == Family::log_inverse || family_ == Family::dini_log ? scale_
                                                                         : std::numeric_limits<double>::infinity();
  }

  double operator()(double r) const {
    if (!(r > 0.0)) throw std::domain_error("Modulus: r must be positive");
    switch (family_) {
      case Family::power: return std::pow(r, beta_);
      case Family::constant: return 1.0;
      case Family::log_inverse:
      case Family::dini_log: {
        if (!(r < scale_)) throw std::domain_error("Modulus: r outside (0, scale)");
        return std::pow(std::log(scale_ / r), -sigma_);
      }
    }
    return 1.0;
  }

  /// Checks the doubling certificate on a 100 x 100 log grid of
  /// r in [1e-6 r_max, r_max] and rho in [1e-6, 1].
  bool certificate_holds(double r_max) const {
    if (!(r_max > 0.0) || !(r_max < domain_max())) throw std::domain_error("Modulus: r_max outside the domain");
    for (int i = 0; i < 100; ++i) {
      const double r = r_max * std::pow(1e-6, i / 99.0);
      for (int j = 0; j < 100; ++j) {
        const double rho = std::pow(1e-6, j / 99.0);
        if ((*this)(r) > c_omega * std::pow(rho, -beta_cert) * (*this)(r * rho) * (1.0 + 1e-12)) return false;
      }
    }
    return true;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (family_) {
      case Family::power: os << "power(beta=" << beta_ << ")"; break;
      case Family::constant: os << "constant"; break;
      case Family::log_inverse: os << "log_inverse(sigma=" << sigma_ << ",scale=" << scale_ << ")"; break;
      case Family::dini_log: os << "dini_log(scale=" << scale_ << ")"; break;
    }
    return os.str();
  }

  double beta_cert = 1.0;
  double c_omega = 1.0;

 private:
  explicit Modulus(Family f) : family_(f) {}

  Family family_;
  double beta_ = 1.0;
  double sigma_ = 1.0;
  double scale_ = 1.0;
};

struct Ball {
  Point center;
  double r;
};

/// Centers at every `stride`-th lower-triangle barycenter; radii 2h * 2^k
/// while the ball stays strictly inside the rectangle.
inline std::vector<Ball> campanato_family(const Mesh& mesh, int stride = 1) {
  if (stride < 1) throw std::invalid_argument("campanato_family: stride must be >= 1");
  std::vector<Ball> out;
  const double r0 = 2.0 * std::max(mesh.hx(), mesh.hy());
  for (int e = 0; e < mesh.element_count(); e += 2 * stride) {
    const Point c = mesh.barycenter(e);
    const double d = mesh.bounds().distance_to_boundary(c);
    for (double r = r0; r < d; r *= 2.0) out.push_back({c, r});
  }
  return out;
}

/// sup over the family of osc_q(f; B) / omega(r_B).
inline double campanato_seminorm(const Mesh& mesh, const ElemField& f, const Modulus& omega, double q,
                                 const std::vector<Ball>& family) {
  if (family.empty()) throw std::invalid_argument("campanato_seminorm: empty ball family");
  double m = 0.0;
  for (const auto& b : family) m = std::max(m, ball_oscillation(mesh, f, b.center, b.r, q).osc / omega(b.r));
  return m;
}

struct VmoModulus {
  std::vector<double> rho;    // increasing
  std::vector<double> value;  // nondecreasing

  /// Value at the largest grid radius <= r (0 below the grid).
  double operator()(double r) const {
    double v = 0.0;
    for (std::size_t i = 0; i < rho.size() && rho[i] <= r * (1.0 + 1e-12); ++i) v = value[i];
    return v;
  }
};

/// rho -> sup of osc_q over family balls of radius <= rho.
inline VmoModulus vmo_modulus(const Mesh& mesh, const ElemField& f, double q, const std::vector<Ball>& family) {
  if (family.empty()) throw std::invalid_argument("vmo_modulus: empty ball family");
  std::vector<double> radii;
  for (const auto& b : family) radii.push_back(b.r);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
              radii.end());
  VmoModulus out;
  out.rho = radii;
  out.value.assign(radii.size(), 0.0);
  for (const auto& b : family) {
    const auto it = std::lower_bound(radii.begin(), radii.end(), b.r * (1.0 - 1e-12));
    const std::size_t k = static_cast<std::size_t>(it - radii.begin());
    out.value[k] = std::max(out.value[k], ball_oscillation(mesh, f, b.center, b.r, q).osc);
  }
  for (std::size_t k = 1; k < out.value.size(); ++k) out.value[k] = std::max(out.value[k], out.value[k - 1]);
  return out;
}

inline VmoModulus vmo_modulus(const Mesh& mesh, const ElemField& f, double q) {
  return vmo_modulus(mesh, f, q, campanato_family(mesh));
}

/// sup over barycenter pairs of |f(x) - f(y)| / omega(|x - y|). Pairs are all
/// neighbours within a small cell window plus every element against a strided
/// set of anchors, capped near max_pairs.
inline double holder_seminorm(const Mesh& mesh, const ElemField& f, const Modulus& omega,
                              std::size_t max_pairs = 1000000) {
  const int M = mesh.cells_per_side();
  const int E = mesh.element_count();
  double m = 0.0;
  std::size_t used = 0;
  auto visit = [&](int a, int b) {
    const double d = distance(mesh.barycenter(a), mesh.barycenter(b));
    if (!(d > 0.0) || !(d < omega.domain_max())) return;
    m = std::max(m, (f.at(a) - f.at(b)).norm() / omega(d));
    ++used;
  };
  const std::size_t local_budget = max_pairs / 2;
  int w = 2;
  while (w > 0 && static_cast<std::size_t>(E) * (2 * w + 1) * (2 * w + 1) > local_budget) --w;
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i)
      for (int t = 0; t < 2; ++t) {
        const int a = 2 * (j * M + i) + t;
        for (int dj = -w; dj <= w; ++dj)
          for (int di = -w; di <= w; ++di) {
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= M || jj >= M) continue;
            for (int tt = 0; tt < 2; ++tt) {
              const int b = 2 * (jj * M + ii) + tt;
              if (b > a) visit(a, b);
            }
          }
      }
  const std::size_t anchor_budget = max_pairs - std::min(max_pairs, used);
  const std::size_t anchors = std::max<std::size_t>(1, anchor_budget / static_cast<std::size_t>(E));
  const int stride = std::max(1, static_cast<int>(E / anchors));
  for (int a = stride / 2; a < E; a += stride)
    for (int b = 0; b < E; ++b)
      if (b != a) visit(a, b);
  return m;
}

/// varpi(r) = int_0^r omega(rho) / rho d rho, in closed form per family.
class DiniTransform {
 public:
  explicit DiniTransform(const Modulus& omega) : omega_(omega) {
    switch (omega.family()) {
      case Modulus::Family::power: break;
      case Modulus::Family::log_inverse:
        if (omega.sigma() <= 1.0) reason_ = "int_0 log(s/rho)^{-sigma} d rho / rho diverges for sigma <= 1";
        break;
      case Modulus::Family::dini_log: reason_ = "int_0 d rho / (rho log(s/rho)) = log log(s/rho) diverges"; break;
      case Modulus::Family::constant: reason_ = "int_0 d rho / rho diverges"; break;
    }
  }

  bool divergent() const noexcept { return !reason_.empty(); }
  const std::string& reason() const noexcept { return reason_; }

  double operator()(double r) const {
    if (divergent()) throw std::domain_error("dini_transform: " + reason_);
    if (r <= 0.0) return 0.0;
    if (omega_.family() == Modulus::Family::power) return std::pow(r, omega_.beta()) / omega_.beta();
    const double L = std::log(omega_.scale() / r);
    const double s = omega_.sigma();
    return std::pow(L, 1.0 - s) / (s - 1.0);
  }

  /// int_a^r omega(rho)/rho d rho, finite for every a > 0 even in the divergent case.
  double partial(double a, double r) const {
    if (!(0.0 < a && a <= r)) throw std::domain_error("dini_transform: need 0 < a <= r");
    switch (omega_.family()) {
      case Modulus::Family::power:
        return (std::pow(r, omega_.beta()) - std::pow(a, omega_.beta())) / omega_.beta();
      case Modulus::Family::constant: return std::log(r / a);
      case Modulus::Family::log_inverse:
      case Modulus::Family::dini_log: {
        const double La = std::log(omega_.scale() / a), Lr = std::log(omega_.scale() / r);
        const double s = omega_.sigma();
        if (s == 1.0) return std::log(La / Lr);
        return (std::pow(Lr, 1.0 - s) - std::pow(La, 1.0 - s)) / (s - 1.0);
      }
    }
    return 0.0;
  }

 private:
  Modulus omega_;
  std::string reason_;
};

inline DiniTransform dini_transform(const Modulus& omega) { return DiniTransform(omega); }

/// zeta(r) = ( int_{r^{1/n}}^{R0^{1/n}} omega(rho)/rho d rho )^{-1} for r in (0, R0).
class ZetaTransform {
 public:
  ZetaTransform(const Modulus& omega, int n, double R0) : omega_(omega), n_(n), R0_(R0) {
    if (n < 1) throw std::invalid_argument("zeta_transform: n must be >= 1");
    if (!(R0 > 0.0)) throw std::invalid_argument("zeta_transform: R0 must be positive");
    if (!(std::pow(R0, 1.0 / n) < omega.domain_max()))
      throw std::invalid_argument("zeta_transform: R0^{1/n} outside the modulus domain");
  }

  double operator()(double r) const {
    if (!(r > 0.0) || !(r < R0_)) throw std::domain_error("zeta_transform: r must lie in (0, R0)");
    const double a = std::pow(r, 1.0 / n_), b = std::pow(R0_, 1.0 / n_);
    double I = 0.0;
    switch (omega_.family()) {
      case Modulus::Family::constant: I = std::log(R0_ / r) / n_; break;
      case Modulus::Family::power: {
        const double beta = omega_.beta();
        I = (std::pow(R0_, beta / n_) - std::pow(r, beta / n_)) / beta;
        break;
      }
      case Modulus::Family::log_inverse:
      case Modulus::Family::dini_log: {
        // t = log(s / rho) turns the integral into int t^{-sigma} dt
        const double ta = std::log(omega_.scale() / a), tb = std::log(omega_.scale() / b);
        const double s = omega_.sigma();
        I = s == 1.0 ? std::log(ta / tb) : (std::pow(ta, 1.0 - s) - std::pow(tb, 1.0 - s)) / (1.0 - s);
        break;
      }
    }
    return 1.0 / I;
  }

  int n() const noexcept { return n_; }
  double R0() const noexcept { return R0_; }

 private:
  Modulus omega_;
  int n_;
  double R0_;
};

inline ZetaTransform zeta_transform(const Modulus& omega, int n, double R0) { return ZetaTransform(omega, n, R0); }

/// zeta^{1/(p-1)}.
inline double zeta_p(const ZetaTransform& zeta, const Exponent& p, double r) {
  return std::pow(zeta(r), 1.0 / (p.p() - 1.0));
}

struct PotentialParams {
  double R;
  double theta;
  Exponent p;

  PotentialParams(double R_, double theta_, Exponent p_) : R(R_), theta(theta_), p(p_) {
    if (!(R > 0.0)) throw std::invalid_argument("PotentialParams: R must be positive");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("PotentialParams: theta must lie in (0,1)");
  }
};

/// Number of dyadic terms minus one: floor(log(2h/R) / log theta).
inline int potential_depth(const Mesh& mesh, const PotentialParams& prm) {
  const double h2 = 2.0 * std::max(mesh.hx(), mesh.hy());
  if (prm.R < h2) throw std::invalid_argument("oscillation_potential: R below two mesh widths");
  return static_cast<int>(std::floor(std::log(h2 / prm.R) / std::log(prm.theta) + 1e-12));
}

/// sum_{i=0}^{K} osc_{p'}(F; B_{theta^i R}(x)) log(1/theta).
inline double oscillation_potential(const Mesh& mesh, const ElemField& F, Point x, const PotentialParams& prm) {
  detail::check_margin(mesh, x, prm.R, BallPolicy::inside, "oscillation_potential");
  const int K = potential_depth(mesh, prm);
  const double q = prm.p.pprime();
  double sum = 0.0, r = prm.R;
  for (int i = 0; i <= K; ++i, r *= prm.theta) sum += ball_oscillation(mesh, F, x, r, q).osc;
  return sum * std::log(1.0 / prm.theta);
}

}  // namespace plap
