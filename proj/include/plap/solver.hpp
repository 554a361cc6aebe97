#pragma once
//
// Discrete p-Laplace system -div(|grad u|^{p-2} grad u) = -div F with
// Dirichlet data, solved by damped Kacanov (frozen coefficient) iteration.
//

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "plap/linalg.hpp"
#include "plap/mesh.hpp"
#include "plap/nfunc.hpp"

namespace plap {

struct DirichletProblem {
  Exponent p;
  std::shared_ptr<const Mesh> mesh;
  ElemField F;  // N x 2 per element
  NodalField g; // only boundary values are used

  DirichletProblem(Exponent p_, std::shared_ptr<const Mesh> mesh_, ElemField F_, NodalField g_)
      : p(p_), mesh(std::move(mesh_)), F(std::move(F_)), g(std::move(g_)) {
    if (!mesh) throw std::invalid_argument("DirichletProblem: null mesh");
    if (F.element_count() != mesh->element_count() || F.cols() != Mesh::kDim)
      throw std::invalid_argument("DirichletProblem: F does not match the mesh");
    if (g.node_count() != mesh->node_count())
      throw std::invalid_argument("DirichletProblem: g does not match the mesh");
    if (F.rows() != g.components())
      throw std::invalid_argument("DirichletProblem: F and g disagree on N");
    for (double v : F.values())
      if (!std::isfinite(v)) throw std::invalid_argument("DirichletProblem: non-finite F");
    for (double v : g.values())
      if (!std::isfinite(v)) throw std::invalid_argument("DirichletProblem: non-finite g");
  }

  int components() const noexcept { return g.components(); }
};

struct SolverConfig {
  /// Gradient regularization; defaults to 1e-8 * data_scale.
  std::optional<double> eps_reg;
  double tol_energy = 1e-15;
  double tol_residual = 1e-9;
  /// Accepted residual once it stops improving (regularization floor).
  double tol_stall = 1e-6;
  /// Iterations without halving the best residual that count as a plateau.
  int stall_window = 20;
  int max_iter = 400;
  /// Clamp for the frozen coefficient, relative to data_scale^{p-2}.
  double kappa_min = 1e-10;
  double kappa_max = 1e10;
  double cg_tol = 1e-12;
  int cg_max_iter = 20000;
  int max_halvings = 30;
  /// Starting iterate (interior values); the linear solve is used when absent.
  std::optional<NodalField> initial;
};

struct Solution {
  NodalField u;
  int iterations = 0;
  std::vector<double> energy_trace;  // regularized energy of accepted iterates
  double residual = 0.0;
  /// Stopped on a residual plateau with tol_residual < residual <= tol_stall.
  bool stalled = false;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, std::vector<double> trace, double residual)
      : std::runtime_error(what), energy_trace(std::move(trace)), last_residual(residual) {}

  std::vector<double> energy_trace;
  double last_residual;
};

namespace detail {

inline double gradient_sq(const ElemField& g, int e) {
  double s = 0.0;
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c) s += g(e, r, c) * g(e, r, c);
  return s;
}

// (x + d)^e - x^e for x > 0 and x + d >= 0, without cancellation for small d.
inline double pow_difference(double x, double d, double e) {
  if (x == 0.0) return pow_nonneg(d, e);
  return pow_nonneg(x, e) * std::expm1(e * std::log1p(d / x));
}

inline CsrMatrix p1_pattern(const Mesh& mesh) {
  std::vector<std::vector<int>> rows(mesh.node_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& t = mesh.element(e);
    for (int a : t)
      for (int b : t) rows[a].push_back(b);
  }
  return CsrMatrix(std::move(rows));
}

}  // namespace detail

/// Scale of the solution gradient implied by the data: max of
/// max|F|^{1/(p-1)} and osc(g)/diam, or 1 when both vanish.
inline double data_scale(const DirichletProblem& prob) {
  double fmax = 0.0;
  for (int e = 0; e < prob.F.element_count(); ++e) fmax = std::max(fmax, prob.F.at(e).norm());
  double gosc = 0.0;
  for (int c = 0; c < prob.components(); ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = 0; k < prob.mesh->node_count(); ++k)
      if (prob.mesh->is_boundary(k)) {
        lo = std::min(lo, prob.g(k, c));
        hi = std::max(hi, prob.g(k, c));
      }
    gosc = std::max(gosc, hi - lo);
  }
  const double s = std::max(std::pow(fmax, 1.0 / (prob.p.p() - 1.0)), gosc / prob.mesh->bounds().diameter());
  return s > 0.0 ? s : 1.0;
}

/// Energy  int (1/p)|grad u|^p - F . grad u  evaluated exactly per element.
inline double energy(const DirichletProblem& prob, const NodalField& u) {
  const ElemField g = gradient(*prob.mesh, u);
  const double p = prob.p.p();
  double s = 0.0;
  for (int e = 0; e < g.element_count(); ++e) {
    const double n2 = detail::gradient_sq(g, e);
    double fg = 0.0;
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) fg += prob.F(e, r, c) * g(e, r, c);
    s += prob.mesh->area(e) * (detail::pow_nonneg(n2, 0.5 * p) / p - fg);
  }
  return s;
}

/// Per-node weak-form residual  int (A(grad u) - F) . grad phi_i  for every
/// interior node and component (boundary entries are zero).
inline NodalField residual_vector(const DirichletProblem& prob, const NodalField& u) {
  const Mesh& mesh = *prob.mesh;
  const ElemField g = gradient(mesh, u);
  const int N = prob.components();
  NodalField r(mesh.node_count(), N);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Tensor flux = a_map(prob.p, g.at(e)) - prob.F.at(e);
    const auto& t = mesh.element(e);
    for (int k = 0; k < 3; ++k) {
      if (mesh.is_boundary(t[k])) continue;
      const auto& hg = mesh.hat_gradient(e, k);
      for (int c = 0; c < N; ++c) r(t[k], c) += mesh.area(e) * (flux(c, 0) * hg[0] + flux(c, 1) * hg[1]);
    }
  }
  return r;
}

/// max over interior hat directions of |weak-form residual| / (1 + ||F||_1).
inline double residual(const DirichletProblem& prob, const NodalField& u) {
  const NodalField r = residual_vector(prob, u);
  double m = 0.0;
  for (double v : r.values()) m = std::max(m, std::abs(v));
  const double f1 = integrate(*prob.mesh, prob.F.norms());
  return m / (1.0 + f1);
}

namespace detail {

class KacanovSolver {
 public:
  KacanovSolver(const DirichletProblem& prob, const SolverConfig& cfg)
      : prob_(prob), cfg_(cfg), mesh_(*prob.mesh), p_(prob.p.p()), matrix_(p1_pattern(mesh_)) {
    const double scale = data_scale(prob);
    eps_ = cfg.eps_reg.value_or(1e-8 * scale);
    const double sp = std::pow(scale, p_ - 2.0);
    kmin_ = cfg.kappa_min * sp;
    kmax_ = cfg.kappa_max * sp;
    if (!(kmin_ <= kmax_)) throw std::invalid_argument("SolverConfig: kappa_min exceeds kappa_max");
    if (!(cfg.tol_residual > 0.0) || !(cfg.cg_tol > 0.0) || !(cfg.tol_energy > 0.0) ||
        !(cfg.tol_stall >= cfg.tol_residual) || cfg.stall_window < 1)
      throw std::invalid_argument("SolverConfig: tolerances must be positive");
    free_.assign(mesh_.node_count(), 0);
    for (int k = 0; k < mesh_.node_count(); ++k) free_[k] = mesh_.is_boundary(k) ? 0 : 1;
    slots_.resize(mesh_.element_count());
    for (int e = 0; e < mesh_.element_count(); ++e) {
      const auto& t = mesh_.element(e);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) slots_[e][a][b] = matrix_.find(t[a], t[b]);
    }
  }

  Solution run() {
    const int N = prob_.components();
    NodalField u(mesh_.node_count(), N);
    for (int k = 0; k < mesh_.node_count(); ++k)
      for (int c = 0; c < N; ++c) u(k, c) = mesh_.is_boundary(k) ? prob_.g(k, c) : 0.0;

    std::vector<double> kappa(mesh_.element_count(), 1.0);
    if (cfg_.initial) {
      if (cfg_.initial->node_count() != mesh_.node_count() || cfg_.initial->components() != N)
        throw std::invalid_argument("SolverConfig: initial iterate does not match the problem");
      for (int k = 0; k < mesh_.node_count(); ++k)
        if (!mesh_.is_boundary(k))
          for (int c = 0; c < N; ++c) u(k, c) = (*cfg_.initial)(k, c);
    } else {
      linear_solve(kappa, u);  // p = 2 start
    }

    Solution sol;
    ElemField grad = gradient(mesh_, u);
    double J = regularized_energy(grad);
    sol.energy_trace.push_back(J);
    sol.residual = residual(prob_, u);
    if (sol.residual <= cfg_.tol_residual) {
      sol.u = std::move(u);
      return sol;
    }

    double best = sol.residual;
    int since = 0;
    for (int it = 1; it <= cfg_.max_iter; ++it) {
      for (int e = 0; e < mesh_.element_count(); ++e) {
        const double n2 = eps_ * eps_ + gradient_sq(grad, e);
        kappa[e] = std::clamp(pow_nonneg(n2, 0.5 * (p_ - 2.0)), kmin_, kmax_);
      }
      NodalField cand = u;
      linear_solve(kappa, cand);
      NodalField dir(mesh_.node_count(), N);
      for (std::size_t k = 0; k < dir.values().size(); ++k) dir.values()[k] = cand.values()[k] - u.values()[k];
      const ElemField gdir = gradient(mesh_, dir);

      double tau = line_search(grad, gdir);
      bool accepted = false;
      double dJ = 0.0;
      for (int h = 0; h <= cfg_.max_halvings; ++h) {
        dJ = energy_change(grad, gdir, tau);
        if (dJ <= 0.0) {
          accepted = true;
          break;
        }
        tau *= 0.5;
      }
      if (!accepted) {
        if (std::abs(dJ) <= cfg_.tol_energy * (1.0 + std::abs(J)))
          throw NonConvergence("Kacanov iteration stagnated: energy no longer decreases", sol.energy_trace,
                               sol.residual);
        throw NonConvergence("Kacanov damping exhausted without energy decrease", sol.energy_trace,
                             sol.residual);
      }
      for (std::size_t k = 0; k < u.values().size(); ++k) u.values()[k] += tau * dir.values()[k];
      for (std::size_t k = 0; k < grad.values().size(); ++k) grad.values()[k] += tau * gdir.values()[k];
      J += dJ;
      sol.energy_trace.push_back(J);
      sol.iterations = it;
      sol.residual = residual(prob_, u);
      if (sol.residual <= cfg_.tol_residual) {
        sol.u = std::move(u);
        return sol;
      }
      if (sol.residual <= 0.5 * best) {
        best = sol.residual;
        since = 0;
      } else if (++since >= cfg_.stall_window) {
        if (sol.residual > cfg_.tol_stall)
          throw NonConvergence("Kacanov iteration stagnated with residual " + std::to_string(sol.residual),
                               sol.energy_trace, sol.residual);
        sol.stalled = true;
        sol.u = std::move(u);
        return sol;
      }
    }
    throw NonConvergence("Kacanov iteration reached max_iter (" + std::to_string(cfg_.max_iter) +
                             ") with residual " + std::to_string(sol.residual),
                         sol.energy_trace, sol.residual);
  }

 private:
  double regularized_energy(const ElemField& grad) const {
    double s = 0.0;
    for (int e = 0; e < mesh_.element_count(); ++e) {
      const double n2 = eps_ * eps_ + gradient_sq(grad, e);
      double fg = 0.0;
      for (std::size_t k = 0; k < static_cast<std::size_t>(grad.rows() * grad.cols()); ++k)
        fg += prob_.F.values()[e * grad.rows() * grad.cols() + k] * grad.values()[e * grad.rows() * grad.cols() + k];
      s += mesh_.area(e) * (pow_nonneg(n2, 0.5 * p_) / p_ - fg);
    }
    return s;
  }

  // d/dtau J(u + tau d).
  double energy_slope(const ElemField& grad, const ElemField& gdir, double tau) const {
    const int stride = grad.rows() * grad.cols();
    double s = 0.0;
    for (int e = 0; e < mesh_.element_count(); ++e) {
      double n2 = eps_ * eps_, gd = 0.0, fd = 0.0;
      for (int k = 0; k < stride; ++k) {
        const double g = grad.values()[e * stride + k] + tau * gdir.values()[e * stride + k];
        const double d = gdir.values()[e * stride + k];
        n2 += g * g;
        gd += g * d;
        fd += prob_.F.values()[e * stride + k] * d;
      }
      s += mesh_.area(e) * (pow_nonneg(n2, 0.5 * (p_ - 2.0)) * gd - fd);
    }
    return s;
  }

  // Minimizer of the convex map tau -> J(u + tau d) to about 1e-3 relative
  // accuracy; the full Kacanov step (tau = 1) when that is already stationary.
  double line_search(const ElemField& grad, const ElemField& gdir) const {
    const double s0 = energy_slope(grad, gdir, 0.0);
    if (!(s0 < 0.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    double shi = energy_slope(grad, gdir, hi);
    for (int k = 0; k < 8 && shi < 0.0; ++k) {
      lo = hi;
      hi *= 2.0;
      shi = energy_slope(grad, gdir, hi);
    }
    if (shi < 0.0) return hi;
    for (int k = 0; k < 40 && hi - lo > 1e-3 * hi; ++k) {
      const double mid = 0.5 * (lo + hi);
      (energy_slope(grad, gdir, mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  // J(u + tau d) - J(u), evaluated elementwise without cancellation.
  double energy_change(const ElemField& grad, const ElemField& gdir, double tau) const {
    const int stride = grad.rows() * grad.cols();
    double s = 0.0;
    for (int e = 0; e < mesh_.element_count(); ++e) {
      double n2 = eps_ * eps_, cross = 0.0, d2 = 0.0, fd = 0.0;
      for (int k = 0; k < stride; ++k) {
        const double g = grad.values()[e * stride + k];
        const double d = gdir.values()[e * stride + k];
        n2 += g * g;
        cross += g * d;
        d2 += d * d;
        fd += prob_.F.values()[e * stride + k] * d;
      }
      const double delta = tau * (2.0 * cross + tau * d2);
      s += mesh_.area(e) * (pow_difference(n2, delta, 0.5 * p_) / p_ - tau * fd);
    }
    return s;
  }

  void linear_solve(const std::vector<double>& kappa, NodalField& u) {
    const int N = prob_.components();
    matrix_.zero();
    std::vector<std::vector<double>> rhs(N, std::vector<double>(mesh_.node_count(), 0.0));
    for (int e = 0; e < mesh_.element_count(); ++e) {
      const auto& t = mesh_.element(e);
      const double w = kappa[e] * mesh_.area(e);
      for (int a = 0; a < 3; ++a) {
        const auto& ga = mesh_.hat_gradient(e, a);
        for (int b = 0; b < 3; ++b) {
          const auto& gb = mesh_.hat_gradient(e, b);
          matrix_.value_at(slots_[e][a][b]) += w * (ga[0] * gb[0] + ga[1] * gb[1]);
        }
        for (int c = 0; c < N; ++c)
          rhs[c][t[a]] += mesh_.area(e) * (prob_.F(e, c, 0) * ga[0] + prob_.F(e, c, 1) * ga[1]);
      }
    }
    std::vector<double> x(mesh_.node_count());
    for (int c = 0; c < N; ++c) {
      for (int k = 0; k < mesh_.node_count(); ++k) x[k] = u(k, c);
      const CgResult res = conjugate_gradient(matrix_, rhs[c], x, free_, cfg_.cg_tol, cfg_.cg_max_iter);
      if (!res.converged)
        throw NonConvergence("conjugate gradients did not converge (relative residual " +
                                 std::to_string(res.relative_residual) + ")",
                             {}, std::numeric_limits<double>::infinity());
      for (int k = 0; k < mesh_.node_count(); ++k) u(k, c) = x[k];
    }
  }

  const DirichletProblem& prob_;
  const SolverConfig& cfg_;
  const Mesh& mesh_;
  double p_;
  double eps_ = 0.0, kmin_ = 0.0, kmax_ = 0.0;
  CsrMatrix matrix_;
  std::vector<char> free_;
  std::vector<std::array<std::array<int, 3>, 3>> slots_;
};

}  // namespace detail

/// Solves the Dirichlet problem; throws NonConvergence when neither the
/// residual tolerance nor, on a residual plateau, tol_stall is met.
inline Solution solve(const DirichletProblem& prob, const SolverConfig& cfg = {}) {
  detail::KacanovSolver solver(prob, cfg);
  return solver.run();
}

/// p-harmonic Dirichlet problem (F = 0).
inline Solution solve_pharmonic(std::shared_ptr<const Mesh> mesh, const Exponent& p, const NodalField& g,
                                const SolverConfig& cfg = {}) {
  const int ne = mesh->element_count();
  DirichletProblem prob(p, std::move(mesh), ElemField(ne, g.components()), g);
  return solve(prob, cfg);
}

}  // namespace plap
