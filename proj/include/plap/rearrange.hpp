#pragma once
//
// Decreasing rearrangements as exact step functions, and the
// rearrangement-invariant norms built on them: Lebesgue, Lorentz,
// Orlicz (Luxemburg) and Marcinkiewicz. Young functions with numerical
// Legendre conjugation, the Orlicz target transform Phi -> Psi of the
// gradient estimates, and the one-dimensional Hardy-type ratio checks.
//

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "plap/mesh.hpp"
#include "plap/nfunc.hpp"

namespace plap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Piece {
  double measure;
  double value;
};

/// Nonincreasing nonnegative step function on (0, total_measure), zero beyond.
/// Only the last piece may have infinite measure.
class StepFunction {
 public:
  StepFunction() = default;

  explicit StepFunction(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& pc = pieces_[i];
      if (!(pc.measure > 0.0)) throw std::invalid_argument("StepFunction: measures must be positive");
      if (std::isinf(pc.measure) && i + 1 != pieces_.size())
        throw std::invalid_argument("StepFunction: only the last piece may be unbounded");
      if (!(pc.value >= 0.0) || !std::isfinite(pc.value))
        throw std::invalid_argument("StepFunction: values must be finite and nonnegative");
      if (i > 0 && pc.value > pieces_[i - 1].value)
        throw std::invalid_argument("StepFunction: values must be nonincreasing");
    }
    total_ = 0.0;
    for (const auto& pc : pieces_) total_ += pc.measure;
  }

  /// Decreasing rearrangement of |values| carrying the given measures.
  static StepFunction from_samples(const std::vector<double>& values, const std::vector<double>& measures) {
    if (values.size() != measures.size()) throw std::invalid_argument("from_samples: size mismatch");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(values[a]) > std::abs(values[b]); });
    std::vector<Piece> pieces;
    for (std::size_t k : order) {
      const double v = std::abs(values[k]);
      if (!std::isfinite(v)) throw std::invalid_argument("from_samples: non-finite value");
      if (!(measures[k] > 0.0)) continue;
      if (!pieces.empty() && pieces.back().value == v)
        pieces.back().measure += measures[k];
      else
        pieces.push_back({measures[k], v});
    }
    return StepFunction(std::move(pieces));
  }

  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  double total_measure() const noexcept { return total_; }
  bool is_zero() const noexcept { return pieces_.empty() || pieces_.front().value == 0.0; }
  double sup() const noexcept { return pieces_.empty() ? 0.0 : pieces_.front().value; }

  /// Right endpoints of the pieces (cumulative measures).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    double b = 0.0;
    for (const auto& pc : pieces_) out.push_back(b += pc.measure);
    return out;
  }

  /// f*(s), right-continuous.
  double value_at(double s) const {
    double b = 0.0;
    for (const auto& pc : pieces_) {
      b += pc.measure;
      if (s < b) return pc.value;
    }
    return 0.0;
  }

  /// int_0^s f*(r) dr.
  double integral_to(double s) const {
    double acc = 0.0, a = 0.0;
    for (const auto& pc : pieces_) {
      if (s <= a) break;
      const double take = std::min(pc.measure, s - a);
      acc += take * pc.value;
      a += pc.measure;
    }
    return acc;
  }

  double integral() const { return integral_to(kInf); }

  /// Measure of {f* > t}.
  double distribution(double t) const {
    double m = 0.0;
    for (const auto& pc : pieces_)
      if (pc.value > t) m += pc.measure;
    return m;
  }

  StepFunction scaled(double lambda) const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("StepFunction::scaled: negative factor");
    if (lambda == 0.0) return {};
    auto out = pieces_;
    for (auto& pc : out) pc.value *= lambda;
    return StepFunction(std::move(out));
  }

  /// s -> f*(s)^e (still nonincreasing for e > 0).
  StepFunction powered(double e) const {
    auto out = pieces_;
    for (auto& pc : out) pc.value = detail::pow_nonneg(pc.value, e);
    return StepFunction(std::move(out));
  }

 private:
  std::vector<Piece> pieces_;
  double total_ = 0.0;
};

/// Decreasing rearrangement of a per-element scalar field.
inline StepFunction rearrange(const Mesh& mesh, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != mesh.element_count())
    throw std::invalid_argument("rearrange: one value per element required");
  std::vector<double> areas(f.size());
  for (int e = 0; e < mesh.element_count(); ++e) areas[e] = mesh.area(e);
  return StepFunction::from_samples(f, areas);
}

/// f**(s) = (1/s) int_0^s f*.
inline double double_star(const StepFunction& sf, double s) {
  if (!(s > 0.0)) throw std::domain_error("double_star: s must be positive");
  return sf.integral_to(s) / s;
}

namespace detail {

// b^e - a^e for b = a + m, accurate for m << a.
inline double pow_increment(double a, double m, double e) {
  if (std::isinf(m)) return kInf;
  if (a == 0.0) return pow_nonneg(m, e);
  return pow_nonneg(a, e) * std::expm1(e * std::log1p(m / a));
}

}  // namespace detail

/// Admissible Lorentz indices: q in (1,inf) with r in [1,inf], or q = r = 1, or q = r = inf.
inline bool lorentz_admissible(double q, double r) {
  if (q == 1.0 && r == 1.0) return true;
  if (std::isinf(q) && std::isinf(r)) return true;
  return q > 1.0 && std::isfinite(q) && r >= 1.0;
}

/// || s^{1/q - 1/r} f*(s) ||_{L^r(0,inf)}, integrated exactly piece by piece.
inline double lorentz_norm(const StepFunction& sf, double q, double r) {
  if (!lorentz_admissible(q, r))
    throw std::invalid_argument("lorentz_norm: inadmissible indices (q, r)");
  if (sf.is_zero()) return 0.0;
  const double top = sf.sup();
  if (std::isinf(q)) return top;
  const auto& pcs = sf.pieces();
  if (std::isinf(r)) {
    double m = 0.0, b = 0.0;
    for (const auto& pc : pcs) {
      b += pc.measure;
      if (pc.value > 0.0) m = std::max(m, pc.value * detail::pow_nonneg(b, 1.0 / q));
    }
    return m;
  }
  const double e = r / q;
  double acc = 0.0, a = 0.0;
  for (const auto& pc : pcs) {
    if (pc.value > 0.0) {
      if (std::isinf(pc.measure)) return kInf;
      acc += std::pow(pc.value / top, r) * detail::pow_increment(a, pc.measure, e);
    }
    a += pc.measure;
  }
  return top * std::pow(acc / e, 1.0 / r);
}

/// ||f||_{L^q}, q in [1, inf].
inline double lebesgue_norm(const StepFunction& sf, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("lebesgue_norm: q must be >= 1");
  if (sf.is_zero()) return 0.0;
  if (std::isinf(q)) return sf.sup();
  const double top = sf.sup();
  double acc = 0.0;
  for (const auto& pc : sf.pieces()) {
    if (pc.value == 0.0) continue;
    if (std::isinf(pc.measure)) return kInf;
    acc += pc.measure * std::pow(pc.value / top, q);
  }
  return top * std::pow(acc, 1.0 / q);
}

/// sup_s eta(s) f*(s); the sup on each piece is approached at its right end.
inline double marcinkiewicz_norm(const StepFunction& sf, const std::function<double(double)>& eta) {
  double m = 0.0, b = 0.0;
  for (const auto& pc : sf.pieces()) {
    b += pc.measure;
    if (pc.value == 0.0) continue;
    m = std::max(m, eta(b) * pc.value);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Young functions

/// Convex nondecreasing Phi : [0, inf) -> [0, inf] with Phi(0) = 0.
class YoungFunction {
 public:
  enum class Kind { power, exp_type, linf_cap, sampled };

  /// Log grid used for sampled forms: [1e-8, 1e8], 64 points per decade.
  static std::vector<double> default_grid() {
    std::vector<double> t;
    for (int k = -8 * 64; k <= 8 * 64; ++k) t.push_back(std::pow(10.0, k / 64.0));
    return t;
  }

  /// scale * t^q.
  static YoungFunction power(double q, double scale = 1.0) {
    if (!(q >= 1.0)) throw std::invalid_argument("YoungFunction::power: q must be >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("YoungFunction::power: scale must be positive");
    YoungFunction y(Kind::power);
    y.q_ = q;
    y.scale_ = scale;
    return y;
  }

  /// t^q exp(t^gamma): equivalent to t^q near 0 and to e^{t^gamma} at infinity.
  static YoungFunction exp_type(double gamma, double q) {
    if (!(gamma > 0.0) || !(q > 1.0)) throw std::invalid_argument("YoungFunction::exp_type: need gamma > 0, q > 1");
    YoungFunction y(Kind::exp_type);
    y.gamma_ = gamma;
    y.q_ = q;
    return y;
  }

  /// t^q on [0, 1] and +inf beyond.
  static YoungFunction linf_cap(double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("YoungFunction::linf_cap: q must be >= 1");
    YoungFunction y(Kind::linf_cap);
    y.q_ = q;
    y.cap_ = 1.0;
    return y;
  }

  /// Tabulated values on an increasing positive grid; +inf beyond cap.
  /// Non-finite values move the cap to the preceding node.
  static YoungFunction sampled(std::vector<double> t, std::vector<double> values, double cap = kInf) {
    if (t.size() != values.size() || t.size() < 2)
      throw std::invalid_argument("YoungFunction::sampled: need matching grids with >= 2 nodes");
    std::size_t keep = t.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!(t[i] > 0.0) || (i > 0 && !(t[i] > t[i - 1])))
        throw std::invalid_argument("YoungFunction::sampled: grid must be positive increasing");
      if (!std::isfinite(values[i])) {
        keep = i;
        break;
      }
      if (!(values[i] >= 0.0)) throw std::invalid_argument("YoungFunction::sampled: negative value");
    }
    if (keep < t.size()) {
      if (keep < 2) throw std::invalid_argument("YoungFunction::sampled: fewer than 2 finite nodes");
      cap = std::min(cap, t[keep - 1]);
      t.resize(keep);
      values.resize(keep);
    }
    YoungFunction y(Kind::sampled);
    y.t_ = std::move(t);
    y.v_ = std::move(values);
    y.cap_ = cap;
    return y;
  }

  Kind kind() const noexcept { return kind_; }
  double q() const noexcept { return q_; }
  double gamma() const noexcept { return gamma_; }
  double scale() const noexcept { return scale_; }
  /// Phi = +inf for t > cap.
  double cap() const noexcept { return cap_; }
  const std::vector<double>& grid() const noexcept { return t_; }
  const std::vector<double>& grid_values() const noexcept { return v_; }

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (t > cap_) return kInf;
    switch (kind_) {
      case Kind::power:
        return scale_ * std::pow(t, q_);
      case Kind::exp_type:
        return std::pow(t, q_) * std::exp(std::pow(t, gamma_));
      case Kind::linf_cap:
        return std::pow(t, q_);
      case Kind::sampled:
        return eval_sampled(t);
    }
    return kInf;
  }

  /// inf over t of t Phi'(t) / Phi(t) (closed form, or the smallest
  /// chordal log-slope on the grid for sampled forms).
  double lower_index() const {
    switch (kind_) {
      case Kind::power:
      case Kind::exp_type:
      case Kind::linf_cap:
        return q_;
      case Kind::sampled: {
        double m = kInf;
        for (std::size_t i = 0; i + 1 < t_.size(); ++i)
          if (v_[i] > 0.0 && v_[i + 1] > 0.0)
            m = std::min(m, std::log(v_[i + 1] / v_[i]) / std::log(t_[i + 1] / t_[i]));
        return m;
      }
    }
    return 0.0;
  }

  /// Log-slope of Phi near 0 (the exponent k with Phi ~ t^k as t -> 0).
  double index_at_zero() const {
    if (kind_ != Kind::sampled) return q_;
    return first_slope();
  }

  /// Discrete convexity scan on the nodes (sampled) or closed-form check.
  bool passes_convexity_scan(double rel_tol = 1e-9) const {
    if (kind_ != Kind::sampled) return true;
    if (v_.front() < 0.0) return false;
    double prev_slope = v_.front() / t_.front();
    for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
      if (v_[i + 1] < v_[i]) return false;
      const double slope = (v_[i + 1] - v_[i]) / (t_[i + 1] - t_[i]);
      if (slope < prev_slope * (1.0 - rel_tol) - 1e-300) return false;
      prev_slope = slope;
    }
    return true;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::power: os << "power(q=" << q_ << ",scale=" << scale_ << ")"; break;
      case Kind::exp_type: os << "exp_type(gamma=" << gamma_ << ",q=" << q_ << ")"; break;
      case Kind::linf_cap: os << "linf_cap(q=" << q_ << ")"; break;
      case Kind::sampled: os << "sampled(" << t_.size() << " nodes, cap=" << cap_ << ")"; break;
    }
    return os.str();
  }

 private:
  explicit YoungFunction(Kind k) : kind_(k) {}

  double first_slope() const {
    for (std::size_t i = 0; i + 1 < t_.size(); ++i)
      if (v_[i] > 0.0 && v_[i + 1] > 0.0) return std::log(v_[i + 1] / v_[i]) / std::log(t_[i + 1] / t_[i]);
    return 1.0;
  }

  double last_slope() const {
    for (std::size_t i = t_.size() - 1; i > 0; --i)
      if (v_[i] > 0.0 && v_[i - 1] > 0.0) return std::log(v_[i] / v_[i - 1]) / std::log(t_[i] / t_[i - 1]);
    return 1.0;
  }

  double eval_sampled(double t) const {
    if (t < t_.front()) {
      if (v_.front() == 0.0) return 0.0;
      // first grid nodes may still be zero; fall back to a chord through the origin
      return v_.front() * std::pow(t / t_.front(), std::max(1.0, first_slope()));
    }
    if (t > t_.back()) {
      if (v_.back() == 0.0) return 0.0;
      return v_.back() * std::pow(t / t_.back(), std::max(1.0, last_slope()));
    }
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    if (it == t_.end()) return v_.back();
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double a = v_[i], b = v_[i + 1];
    if (a > 0.0 && b > 0.0) {
      const double w = std::log(t / t_[i]) / std::log(t_[i + 1] / t_[i]);
      return a * std::pow(b / a, w);
    }
    const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
    return a + w * (b - a);
  }

  Kind kind_;
  double q_ = 2.0;
  double gamma_ = 1.0;
  double scale_ = 1.0;
  double cap_ = kInf;
  std::vector<double> t_;
  std::vector<double> v_;
};

namespace detail {

// sup_{s >= 0} (t s - Phi(s)) by golden-section search in log s (the
// objective is concave in s, hence unimodal in log s).
inline double legendre_at(const YoungFunction& phi, double t) {
  if (t <= 0.0) return 0.0;
  const double s_cap = std::min(phi.cap(), 1e300);
  auto h = [&](double log_s) {
    const double s = std::exp(log_s);
    const double v = phi(s);
    return std::isinf(v) ? -kInf : t * s - v;
  };
  double lo = std::log(1e-300), hi = std::log(s_cap);
  if (std::isinf(phi.cap())) {
    // sup is infinite when the objective still grows at the far end
    const double far = std::log(1e150);
    const double hf = h(far), hn = h(far - std::log(10.0));
    if (hf > hn && hf > 0.0 && std::isfinite(hf) && hf > 0.5 * t * std::exp(far)) return kInf;
    hi = std::min(hi, far);
  }
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double h1 = h(x1), h2 = h(x2);
  for (int k = 0; k < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo) + std::abs(hi)); ++k) {
    if (h1 < h2) {
      lo = x1;
      x1 = x2;
      h1 = h2;
      x2 = lo + g * (hi - lo);
      h2 = h(x2);
    } else {
      hi = x2;
      x2 = x1;
      h2 = h1;
      x1 = hi - g * (hi - lo);
      h1 = h(x1);
    }
  }
  double best = std::max({0.0, h1, h2, h(std::log(s_cap))});
  return best;
}

}  // namespace detail

/// Young conjugate sup{ts - Phi(s)}. Power forms are conjugated in closed
/// form; everything else is tabulated on the default log grid.
inline YoungFunction young_conjugate(const YoungFunction& phi) {
  if (phi.kind() == YoungFunction::Kind::power && phi.q() > 1.0) {
    const double q = phi.q(), k = phi.scale();
    const double qc = q / (q - 1.0);
    return YoungFunction::power(qc, (q - 1.0) * k * std::pow(k * q, -qc));
  }
  if (phi.kind() == YoungFunction::Kind::power) {
    // k t: conjugate is 0 up to slope k and infinite beyond
    const auto grid = YoungFunction::default_grid();
    std::vector<double> t, v;
    for (double x : grid)
      if (x <= phi.scale()) {
        t.push_back(x);
        v.push_back(0.0);
      }
    return YoungFunction::sampled(t, v, phi.scale());
  }
  const auto grid = YoungFunction::default_grid();
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = detail::legendre_at(phi, grid[i]);
  return YoungFunction::sampled(grid, vals);
}

class NoFiniteNorm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Luxemburg norm inf{lambda > 0 : int Phi(f* / lambda) <= 1}, by bisection
/// in log lambda to relative 1e-10.
inline double luxemburg_norm(const StepFunction& sf, const YoungFunction& phi) {
  if (sf.is_zero()) return 0.0;
  const bool vanishes_near_zero = phi.kind() == YoungFunction::Kind::sampled && phi(phi.grid().front()) == 0.0;
  for (const auto& pc : sf.pieces())
    if (std::isinf(pc.measure) && pc.value > 0.0 && !vanishes_near_zero)
      throw NoFiniteNorm("luxemburg_norm: positive value on a set of infinite measure");
  auto modular = [&](double lambda) {
    double s = 0.0;
    for (const auto& pc : sf.pieces()) {
      if (pc.value == 0.0) continue;
      const double v = phi(pc.value / lambda);
      if (std::isinf(v)) return kInf;
      if (std::isinf(pc.measure)) {
        if (v > 0.0) return kInf;
        continue;
      }
      s += pc.measure * v;
    }
    return s;
  };
  const double grid_lo = phi.kind() == YoungFunction::Kind::sampled ? phi.grid().front() : 1e-8;
  const double grid_hi = phi.kind() == YoungFunction::Kind::sampled ? phi.grid().back() : 1e8;
  const double total = std::isinf(sf.total_measure()) ? 1.0 : sf.total_measure();
  double lo = std::max(sf.integral() / (total * grid_hi), 1e-300);
  double hi = sf.sup() / grid_lo;
  if (!(lo < hi)) lo = hi * 1e-3;
  for (int k = 0; k < 2000 && !(modular(lo) > 1.0); ++k) lo *= 0.5;
  for (int k = 0; k < 2000 && modular(hi) > 1.0; ++k) hi *= 2.0;
  if (modular(hi) > 1.0 || !std::isfinite(hi)) throw NoFiniteNorm("luxemburg_norm: modular never drops to 1");
  if (!(modular(lo) > 1.0)) return lo;
  while (hi - lo > 1e-10 * hi) {
    const double mid = std::sqrt(lo * hi);
    (modular(mid) > 1.0 ? lo : hi) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Norm specifications and norms of general nonincreasing profiles

struct NormSpec {
  enum class Kind { lebesgue, lorentz, orlicz };
  Kind kind = Kind::lebesgue;
  double q = 2.0;
  double r = 2.0;
  std::optional<YoungFunction> phi;

  static NormSpec lebesgue(double q) { return {Kind::lebesgue, q, q, std::nullopt}; }
  static NormSpec lorentz(double q, double r) {
    if (!lorentz_admissible(q, r)) throw std::invalid_argument("NormSpec::lorentz: inadmissible indices");
    return {Kind::lorentz, q, r, std::nullopt};
  }
  static NormSpec orlicz(YoungFunction phi) { return {Kind::orlicz, 0.0, 0.0, std::move(phi)}; }

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::lebesgue: os << "L^" << q; break;
      case Kind::lorentz: os << "L^{" << q << "," << r << "}"; break;
      case Kind::orlicz: os << "L^Phi[" << phi->describe() << "]"; break;
    }
    return os.str();
  }
};

inline double norm(const StepFunction& sf, const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Kind::lebesgue: return lebesgue_norm(sf, spec.q);
    case NormSpec::Kind::lorentz: return lorentz_norm(sf, spec.q, spec.r);
    case NormSpec::Kind::orlicz: return luxemburg_norm(sf, *spec.phi);
  }
  return 0.0;
}

/// Nonincreasing nonnegative function on (0, horizon): smooth between the
/// breakpoints; on [breaks.back(), horizon) it equals tail_coef * s^{-tail_power}.
struct DecreasingProfile {
  std::function<double(double)> value;
  std::vector<double> breaks;
  double tail_coef = 0.0;
  double tail_power = 1.0;
  double horizon = kInf;

  double operator()(double s) const {
    if (s >= horizon) return 0.0;
    if (s >= breaks.back()) return tail_coef == 0.0 ? 0.0 : tail_coef * std::pow(s, -tail_power);
    return value(s);
  }
};

namespace detail {

// int_a^b f over a finite interval; tanh-sinh tolerates endpoint singularities.
template <class F>
double integrate_segment(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  try {
    return ts.integrate(f, a, b, 1e-11);
  } catch (const std::exception&) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-11);
  }
}

// int_0^H w(s) G(g(s)) ds over the smooth stretches of the profile; the power
// tail is handled by the caller.
template <class F>
double integrate_profile_body(const DecreasingProfile& g, F&& integrand) {
  double acc = 0.0, a = 0.0;
  for (double b : g.breaks) {
    const double hi = std::min(b, g.horizon);
    if (hi > a) acc += integrate_segment([&](double s) { return integrand(s, g.value(s)); }, a, hi);
    a = b;
    if (a >= g.horizon) break;
  }
  return acc;
}

inline double tail_upper(const DecreasingProfile& g) { return g.horizon; }

}  // namespace detail

/// Norm of a nonincreasing profile (its own rearrangement).
inline double profile_norm(const DecreasingProfile& g, const NormSpec& spec) {
  const double B = g.breaks.back();
  const bool has_tail = g.tail_coef > 0.0 && g.horizon > B;

  if (spec.kind == NormSpec::Kind::orlicz) {
    const YoungFunction& phi = *spec.phi;
    auto modular = [&](double lambda) {
      double m = detail::integrate_profile_body(g, [&](double, double v) { return phi(v / lambda); });
      if (has_tail) {
        // substitute u = c s^{-a} / lambda
        const double c = g.tail_coef / lambda, a = g.tail_power;
        const double uB = c * std::pow(B, -a);
        const double uH = std::isinf(g.horizon) ? 0.0 : c * std::pow(g.horizon, -a);
        const double pref = std::pow(c, 1.0 / a) / a;
        m += pref * detail::integrate_segment([&](double u) { return phi(u) * std::pow(u, -1.0 / a - 1.0); }, uH, uB);
      }
      return m;
    };
    double top = g.value(std::min(B, g.horizon) * 1e-12);
    if (!(top > 0.0)) return 0.0;
    double lo = top * 1e-12, hi = top * 1e3;
    for (int k = 0; k < 400 && modular(hi) > 1.0; ++k) hi *= 2.0;
    for (int k = 0; k < 400 && !(modular(lo) > 1.0); ++k) lo *= 0.5;
    if (modular(hi) > 1.0) throw NoFiniteNorm("profile_norm: modular never drops to 1");
    while (hi - lo > 1e-9 * hi) {
      const double mid = std::sqrt(lo * hi);
      (modular(mid) > 1.0 ? lo : hi) = mid;
    }
    return hi;
  }

  double q = spec.q, r = spec.kind == NormSpec::Kind::lebesgue ? spec.q : spec.r;
  if (std::isinf(q) && std::isinf(r)) return g.value(std::min(B, g.horizon) * 1e-15);
  if (std::isinf(r)) {
    // sup s^{1/q} g(s): dense log sampling of each stretch plus the tail start
    double m = 0.0, a = 0.0;
    for (double b : g.breaks) {
      const double hi = std::min(b, g.horizon);
      const double lo = a > 0.0 ? a : hi * 1e-9;
      for (int k = 0; k <= 400; ++k) {
        const double s = lo * std::pow(hi / lo, k / 400.0);
        m = std::max(m, std::pow(s, 1.0 / q) * g.value(std::min(s, hi * (1 - 1e-15))));
      }
      a = b;
    }
    if (has_tail) {
      const double e = 1.0 / q - g.tail_power;
      if (e > 0.0 && std::isinf(g.horizon)) return kInf;
      const double s_end = e > 0.0 ? g.horizon : B;
      m = std::max(m, g.tail_coef * std::pow(s_end, e));
    }
    return m;
  }
  const double e = r / q;
  double acc = detail::integrate_profile_body(
      g, [&](double s, double v) { return std::pow(s, e - 1.0) * std::pow(v, r); });
  if (has_tail) {
    // int_B^H s^{e-1} c^r s^{-a r} ds
    const double k = e - g.tail_power * r;
    const double cr = std::pow(g.tail_coef, r);
    if (std::isinf(g.horizon)) {
      if (k >= 0.0) return kInf;
      acc += cr * std::pow(B, k) / (-k);
    } else {
      acc += cr * (k == 0.0 ? std::log(g.horizon / B) : (std::pow(g.horizon, k) - std::pow(B, k)) / k);
    }
  }
  return std::pow(acc, 1.0 / r);
}

/// ||f||_{X^gamma} = || |f|^gamma ||_X^{1/gamma} for a step function.
inline double power_norm(const StepFunction& sf, const NormSpec& spec, double gamma) {
  return std::pow(norm(sf.powered(gamma), spec), 1.0 / gamma);
}

/// Ratios || (1/s) int_0^s phi ||_{X^{1/p'}} / || phi ||_{X^{1/p'}} over a
/// family, computed on (0, horizon).
inline std::vector<double> hardy_check_avg(const NormSpec& X, const Exponent& p, const std::vector<StepFunction>& family,
                                           double horizon = kInf) {
  const double gamma = 1.0 / p.pprime();
  std::vector<double> out;
  for (const auto& phi : family) {
    if (phi.total_measure() > horizon * (1.0 + 1e-12))
      throw std::invalid_argument("hardy_check_avg: family member extends beyond the horizon");
    const double den = power_norm(phi, X, gamma);
    if (den == 0.0) {
      out.push_back(0.0);
      continue;
    }
    DecreasingProfile avg;
    auto bps = phi.breakpoints();
    avg.breaks = bps;
    avg.value = [&phi, gamma](double s) { return std::pow(double_star(phi, s), gamma); };
    avg.tail_coef = std::pow(phi.integral(), gamma);
    avg.tail_power = gamma;
    avg.horizon = horizon;
    const double num = std::pow(profile_norm(avg, X), 1.0 / gamma);
    out.push_back(num / den);
  }
  return out;
}

/// int_s^inf phi(r) dr / r for a nonnegative piecewise constant phi whose
/// pieces are laid end to end from 0 (values need not be monotone).
inline double tail_transform(const std::vector<Piece>& pieces, double s) {
  double acc = 0.0, a = 0.0;
  for (const auto& pc : pieces) {
    const double b = a + pc.measure;
    if (b > s && pc.value > 0.0) {
      if (std::isinf(b)) return kInf;
      acc += pc.value * std::log(b / std::max(s, a));
    }
    a = b;
  }
  return acc;
}

inline double tail_transform(const StepFunction& phi, double s) { return tail_transform(phi.pieces(), s); }

/// Ratios || int_s^inf phi dr/r ||_Y / || phi ||_X over a family of
/// piecewise constant functions.
inline std::vector<double> hardy_check_tail(const NormSpec& X, const NormSpec& Y,
                                            const std::vector<std::vector<Piece>>& family) {
  std::vector<double> out;
  for (const auto& phi : family) {
    std::vector<double> values, measures;
    std::vector<double> breaks;
    double b = 0.0;
    for (const auto& pc : phi) {
      if (!(pc.measure > 0.0) || !(pc.value >= 0.0)) throw std::invalid_argument("hardy_check_tail: bad piece");
      if (std::isinf(pc.measure) && pc.value > 0.0)
        throw std::invalid_argument("hardy_check_tail: tail integral diverges (positive value on an unbounded piece)");
      if (std::isinf(pc.measure)) break;
      values.push_back(pc.value);
      measures.push_back(pc.measure);
      breaks.push_back(b += pc.measure);
    }
    const double den = norm(StepFunction::from_samples(values, measures), X);
    if (den == 0.0) {
      out.push_back(0.0);
      continue;
    }
    DecreasingProfile tail;
    tail.breaks = breaks;
    tail.value = [&phi](double s) { return tail_transform(phi, s); };
    out.push_back(profile_norm(tail, Y) / den);
  }
  return out;
}

inline std::vector<double> hardy_check_tail(const NormSpec& X, const NormSpec& Y, const std::vector<StepFunction>& family) {
  std::vector<std::vector<Piece>> general;
  for (const auto& f : family) general.push_back(f.pieces());
  return hardy_check_tail(X, Y, general);
}

// ---------------------------------------------------------------------------
// Orlicz target transform

/// A hypothesis of the Orlicz estimate does not hold for the given Phi.
class HypothesisViolation : public std::runtime_error {
 public:
  HypothesisViolation(const std::string& which, double measured, const std::string& detail)
      : std::runtime_error(which + " violated: " + detail), condition(which), measured_value(measured) {}
  std::string condition;
  double measured_value;
};

struct OrliczTarget {
  YoungFunction psi;
  double lower_index;        // inf t Phi'(t) / Phi(t)
  double conjugate_index0;   // exponent of Phi~ at 0
};

/// Psi with Psi(t^{1/(p-1)}) = ( t int_0^t Phi~(r)/r^2 dr )~.
inline OrliczTarget orlicz_target(const YoungFunction& phi, const Exponent& p) {
  const double idx = phi.lower_index();
  if (!(idx > p.pprime()))
    throw HypothesisViolation("index condition", idx,
                              "inf t Phi'(t)/Phi(t) = " + std::to_string(idx) + " is not above p' = " +
                                  std::to_string(p.pprime()));
  const YoungFunction conj = young_conjugate(phi);
  const double k0 = conj.index_at_zero();
  if (!(k0 > 1.0 + 1e-9))
    throw HypothesisViolation("integrability at 0", k0,
                              "Phi~ ~ t^" + std::to_string(k0) + " near 0, so int_0 Phi~(r)/r^2 dr diverges");

  // cumulative t int_0^t Phi~(r)/r^2 dr, exact for power-law pieces
  const auto grid = YoungFunction::default_grid();
  std::vector<double> G(grid.size());
  double integral = conj(grid.front()) / (grid.front() * (k0 - 1.0));
  G[0] = grid.front() * integral;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    const double fa = conj(a), fb = conj(b);
    double piece;
    if (std::isinf(fb)) {
      piece = kInf;
    } else if (fa > 0.0 && fb > 0.0) {
      const double k = std::log(fb / fa) / std::log(b / a);
      // int_a^b fa (r/a)^k r^{-2} dr
      piece = std::abs(k - 1.0) < 1e-12 ? fa / a * std::log(b / a)
                                        : fa / a * (std::pow(b / a, k - 1.0) - 1.0) / (k - 1.0);
    } else {
      piece = 0.5 * (fa / (a * a) + fb / (b * b)) * (b - a);
    }
    integral += piece;
    G[i + 1] = b * integral;
  }
  const YoungFunction Gf = YoungFunction::sampled(grid, G);
  const YoungFunction H = young_conjugate(Gf);

  std::vector<double> psi_vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) psi_vals[i] = H(std::pow(grid[i], p.p() - 1.0));
  const double cap = std::isinf(H.cap()) ? kInf : std::pow(H.cap(), 1.0 / (p.p() - 1.0));
  return {YoungFunction::sampled(grid, psi_vals, cap), idx, k0};
}

}  // namespace plap
