#pragma once
//
// Discrete maximal operators over centered balls with a finite radius set:
// the sharp maximal function M^{#,q}, its localized omega-weighted variant,
// and the plain maximal function M^q.
//

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/mesh.hpp"

namespace plap {

/// Radii {r_max * ratio^k : k >= 0} that are >= r_min.
struct RadiiSet {
  double r_min;
  double r_max;
  double ratio = 0.5;

  RadiiSet(double r_min_, double r_max_, double ratio_ = 0.5) : r_min(r_min_), r_max(r_max_), ratio(ratio_) {
    if (!(r_min > 0.0) || !(r_min <= r_max)) throw std::invalid_argument("RadiiSet: need 0 < r_min <= r_max");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("RadiiSet: ratio must lie in (0,1)");
  }

  std::vector<double> radii() const {
    std::vector<double> out;
    for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= ratio) out.push_back(r);
    return out;
  }
};

/// Whether balls must lie inside the meshed rectangle or may be clipped by it.
enum class BallPolicy { inside, clipped };

namespace detail {

inline void check_margin(const Mesh& mesh, Point x, double r, BallPolicy policy, const char* who) {
  if (policy == BallPolicy::clipped) return;
  if (!(mesh.bounds().distance_to_boundary(x) > r))
    throw BoundaryMarginError(std::string(who) + ": point closer than " + std::to_string(r) +
                              " to the boundary");
}

}  // namespace detail

/// max over radii of the q-mean oscillation of f on B_r(x).
inline double sharp_maximal(const Mesh& mesh, const ElemField& f, double q, const RadiiSet& radii, Point x,
                            BallPolicy policy = BallPolicy::inside) {
  detail::check_margin(mesh, x, radii.r_max, policy, "sharp_maximal");
  double m = 0.0;
  for (double r : radii.radii()) m = std::max(m, ball_oscillation(mesh, f, x, r, q).osc);
  return m;
}

/// max over radii r < R of osc_q(f; B_r(x)) / omega(r), for dist(x, boundary) > R.
template <class Omega>
double weighted_local_sharp(const Mesh& mesh, const ElemField& f, double q, const Omega& omega, double R,
                            const RadiiSet& radii, Point x) {
  if (!(radii.r_max < R)) throw std::invalid_argument("weighted_local_sharp: radii must stay below R");
  detail::check_margin(mesh, x, R, BallPolicy::inside, "weighted_local_sharp");
  double m = 0.0;
  for (double r : radii.radii()) m = std::max(m, ball_oscillation(mesh, f, x, r, q).osc / omega(r));
  return m;
}

/// max over radii of (mean of |f|^q over B_r(x))^{1/q}.
inline double plain_maximal(const Mesh& mesh, const ElemField& f, double q, const RadiiSet& radii, Point x,
                            BallPolicy policy = BallPolicy::inside) {
  if (!(q >= 1.0)) throw std::invalid_argument("plain_maximal: q must be >= 1");
  detail::check_margin(mesh, x, radii.r_max, policy, "plain_maximal");
  double m = 0.0;
  for (double r : radii.radii()) {
    const double mean = ball_mean(mesh, f, x, r, [q](const Tensor& t) { return std::pow(t.norm(), q); });
    m = std::max(m, std::pow(mean, 1.0 / q));
  }
  return m;
}

/// plain_maximal evaluated at every element barycenter.
inline std::vector<double> plain_maximal_field(const Mesh& mesh, const ElemField& f, double q, const RadiiSet& radii,
                                               BallPolicy policy = BallPolicy::clipped) {
  std::vector<double> out(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) out[e] = plain_maximal(mesh, f, q, radii, mesh.barycenter(e), policy);
  return out;
}

/// Element indices whose barycenter keeps a margin > r from the boundary.
inline std::vector<int> interior_elements(const Mesh& mesh, double margin) {
  std::vector<int> out;
  for (int e = 0; e < mesh.element_count(); ++e)
    if (mesh.bounds().distance_to_boundary(mesh.barycenter(e)) > margin) out.push_back(e);
  return out;
}

}  // namespace plap
