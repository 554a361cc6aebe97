#pragma once
// Independent reference computations for the test suites. Nothing here calls
// the library routine it is used to check.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "plap/mesh.hpp"

namespace oracle {

using plap::Mesh;
using plap::Point;

/// Elements whose barycenter is strictly inside the ball, by full scan.
inline std::vector<int> ball_members(const Mesh& mesh, Point c, double r) {
  std::vector<int> out;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double dx = mesh.barycenter(e).x - c.x, dy = mesh.barycenter(e).y - c.y;
    if (dx * dx + dy * dy < r * r) out.push_back(e);
  }
  return out;
}

/// q-mean oscillation of a scalar per-element field over a member list.
inline double scalar_osc(const Mesh& mesh, const std::vector<double>& f, const std::vector<int>& members, double q) {
  double area = 0.0, mean = 0.0;
  for (int e : members) {
    area += mesh.area(e);
    mean += mesh.area(e) * f[e];
  }
  mean /= area;
  double acc = 0.0;
  for (int e : members) acc += mesh.area(e) * std::pow(std::abs(f[e] - mean), q);
  return std::pow(acc / area, 1.0 / q);
}

/// Elements of cell (i, j): both triangles.
inline std::vector<double> cell_indicator(const Mesh& mesh, int i, int j) {
  std::vector<double> f(mesh.element_count(), 0.0);
  const int cell = j * mesh.cells_per_side() + i;
  f[2 * cell] = f[2 * cell + 1] = 1.0;
  return f;
}

/// 2 mu (1 - mu) for the covered fraction mu of an indicator on a uniform mesh.
inline double indicator_osc1(const std::vector<double>& f, const std::vector<int>& members) {
  double hits = 0.0;
  for (int e : members) hits += f[e];
  const double mu = hits / static_cast<double>(members.size());
  return 2.0 * mu * (1.0 - mu);
}

/// Mean over the unit disk of |x_1|^q, so that a linear field b.x has
/// q-oscillation c_q |b| r on B_r.
inline double linear_osc_constant(double q) {
  const double m = 2.0 / (q + 2.0) * std::tgamma((q + 1.0) / 2.0) / (std::sqrt(std::numbers::pi) * std::tgamma(q / 2.0 + 1.0));
  return std::pow(m, 1.0 / q);
}

}  // namespace oracle
