#pragma once
//
// Seeded generators for the test and experiment inputs: tensors with
// log-uniform scales, truncated trigonometric series, rough boundary traces
// and random step functions.
//

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "plap/mesh.hpp"
#include "plap/nfunc.hpp"
#include "plap/rearrange.hpp"

namespace plap {

using Rng = std::mt19937_64;

/// Normal entries times a scale 10^U with U uniform in [lo, hi].
inline Tensor random_tensor(Rng& rng, int rows, int cols, double log10_lo = -6.0, double log10_hi = 6.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> expo(log10_lo, log10_hi);
  const double s = std::pow(10.0, expo(rng));
  Tensor t(rows, cols);
  for (double& v : t.entries()) v = s * normal(rng);
  return t;
}

/// sum_k a_k sin(pi (k1 x + k2 y) + phase_k), one independent series per component.
class TrigSeries {
 public:
  TrigSeries(std::uint64_t seed, int components, int modes = 8, int max_freq = 3, double amplitude = 1.0)
      : comps_(components) {
    Rng rng(seed);
    std::uniform_int_distribution<int> freq(0, max_freq);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    terms_.resize(components);
    for (int c = 0; c < components; ++c)
      for (int k = 0; k < modes; ++k) {
        int k1 = freq(rng), k2 = freq(rng);
        if (k1 == 0 && k2 == 0) k1 = 1;
        terms_[c].push_back({amplitude * unit(rng) / (1.0 + k1 + k2), static_cast<double>(k1),
                             static_cast<double>(k2), phase(rng)});
      }
  }

  int components() const noexcept { return comps_; }

  double value(Point x, int c) const {
    double s = 0.0;
    for (const auto& t : terms_[c]) s += t.a * std::sin(std::numbers::pi * (t.k1 * x.x + t.k2 * x.y) + t.phase);
    return s;
  }

  std::array<double, 2> gradient(Point x, int c) const {
    std::array<double, 2> g{0.0, 0.0};
    for (const auto& t : terms_[c]) {
      const double d = t.a * std::numbers::pi * std::cos(std::numbers::pi * (t.k1 * x.x + t.k2 * x.y) + t.phase);
      g[0] += d * t.k1;
      g[1] += d * t.k2;
    }
    return g;
  }

  /// Tensor-valued series: row c, column j uses component 2c + j.
  Tensor tensor(Point x, int rows) const {
    Tensor t(rows, 2);
    for (int r = 0; r < rows; ++r)
      for (int j = 0; j < 2; ++j) t(r, j) = value(x, (2 * r + j) % comps_);
    return t;
  }

 private:
  struct Term {
    double a, k1, k2, phase;
  };
  int comps_;
  std::vector<std::vector<Term>> terms_;
};

/// Boundary data that is piecewise linear along the perimeter with `knots`
/// random values per side; interior nodes are zero.
inline NodalField rough_boundary_trace(const Mesh& mesh, int components, std::uint64_t seed, int knots = 8) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int total = 4 * knots;
  std::vector<std::vector<double>> vals(components, std::vector<double>(total));
  for (auto& v : vals)
    for (double& x : v) x = unit(rng);
  const Rect& b = mesh.bounds();
  const double W = b.width(), H = b.height(), P = 2.0 * (W + H);
  auto arclength = [&](Point x) {
    const double eps = 1e-12 * (W + H);
    if (std::abs(x.y - b.y0) < eps) return x.x - b.x0;
    if (std::abs(x.x - b.x1) < eps) return W + (x.y - b.y0);
    if (std::abs(x.y - b.y1) < eps) return W + H + (b.x1 - x.x);
    return 2.0 * W + H + (b.y1 - x.y);
  };
  NodalField g(mesh.node_count(), components);
  for (int k : mesh.boundary_nodes()) {
    const double s = arclength(mesh.node(k)) / P * total;
    const int i = static_cast<int>(std::floor(s)) % total;
    const double w = s - std::floor(s);
    for (int c = 0; c < components; ++c) g(k, c) = (1.0 - w) * vals[c][i] + w * vals[c][(i + 1) % total];
  }
  return g;
}

/// Step function with `pieces` log-uniform measures in [1e-3, 1] and
/// values 10^U, U uniform in [-3, 3], sorted nonincreasing.
inline StepFunction random_step_function(Rng& rng, int pieces) {
  std::uniform_real_distribution<double> lm(-3.0, 0.0), lv(-3.0, 3.0);
  std::vector<double> values(pieces), measures(pieces);
  for (int i = 0; i < pieces; ++i) {
    measures[i] = std::pow(10.0, lm(rng));
    values[i] = std::pow(10.0, lv(rng));
  }
  return StepFunction::from_samples(values, measures);
}

}  // namespace plap
