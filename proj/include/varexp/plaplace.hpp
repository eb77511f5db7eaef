#ifndef VAREXP_PLAPLACE_HPP
#define VAREXP_PLAPLACE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "varexp/grid.hpp"
#include "varexp/modular.hpp"

namespace varexp {

//! Inner-solver knobs shared by every Dirichlet solve.
struct SolverOptions {
  double eps_reg = 1e-8;  // gradient regularization, tames p(x) < 2 at grad u = 0
  double tol = 1e-8;      // sup norm of the discrete weak residual over interior nodes
  long max_iter = 50000;
};

//! Homogeneous Dirichlet problem -div(|grad u|^{p(x)-2} grad u) = rhs, u = 0
//! on the boundary, posed as minimization of the Dirichlet energy.
struct DirichletProblem {
  Grid grid;
  ScalarField p;
  ScalarField rhs;
  double eps_reg = 1e-8;
  double tol = 1e-8;
  long max_iter = 50000;

  static DirichletProblem make(const Grid& g, ScalarField p_field, ScalarField rhs_field,
                               const SolverOptions& opts = {}) {
    require_same_grid(p_field, rhs_field, "DirichletProblem");
    if (!(p_field.grid == g)) throw std::invalid_argument("DirichletProblem: grid mismatch");
    if (!(min_value(p_field) > 1.0))
      throw std::invalid_argument("DirichletProblem: need inf p > 1, got " +
                                  std::to_string(min_value(p_field)));
    require_finite(rhs_field, "DirichletProblem rhs");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("DirichletProblem: tol must be > 0");
    if (opts.eps_reg < 0.0) throw std::invalid_argument("DirichletProblem: eps_reg < 0");
    return DirichletProblem{g, std::move(p_field), std::move(rhs_field), opts.eps_reg, opts.tol,
                            opts.max_iter};
  }
};

struct EnergyReport {
  ScalarField minimizer;
  double energy = 0.0;
  double grad_norm = 0.0;
  long iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;  // energy after each accepted step
};

namespace detail {

// (1/p) [ (g2 + eps^2)^{p/2} - eps^p ]; the shift keeps the energy of the
// zero field exactly zero.
inline double psi(double g2, double p, double eps2) {
  return (std::pow(g2 + eps2, 0.5 * p) - std::pow(eps2, 0.5 * p)) / p;
}

// d psi / d g components come from sigma(g) = (|g|^2 + eps^2)^{(p-2)/2} g.
inline double sigma_scale(double g2, double p, double eps2) {
  return std::pow(g2 + eps2, 0.5 * (p - 2.0));
}

// The discrete gradient that feeds the energy lives on cells: plain
// differences on 1-d cells, P1 gradients on the two axis-aligned right
// triangles of each 2-d cell. The p(x) = 2 optimality system is then the
// classical 3-/5-point Laplacian and carries no spurious null modes.
template <bool WantEnergy, bool WantGradient>
void energy_kernel(const ScalarField& u, const ScalarField& p, const ScalarField& rhs,
                   double eps_reg, double* energy_out, ScalarField* grad_out) {
  const Grid& g = u.grid;
  const double eps2 = eps_reg * eps_reg;
  // extended-precision accumulation keeps energy differences between nearby
  // iterates resolvable, which the line search relies on near convergence
  long double E = 0.0L;
  if constexpr (WantGradient) grad_out->values.assign(g.node_count(), 0.0);

  if (g.dim == 1) {
    const double h = g.h[0];
    for (std::size_t c = 0; c + 1 < g.n[0]; ++c) {
      const double gx = (u[c + 1] - u[c]) / h;
      const double pc = 0.5 * (p[c] + p[c + 1]);
      const double g2 = gx * gx;
      if constexpr (WantEnergy) E += h * psi(g2, pc, eps2);
      if constexpr (WantGradient) {
        const double sx = sigma_scale(g2, pc, eps2) * gx;  // h * sx * (1/h) = sx
        grad_out->values[c] -= sx;
        grad_out->values[c + 1] += sx;
      }
    }
  } else {
    const double hx = g.h[0], hy = g.h[1];
    const double area = 0.5 * hx * hy;
    for (std::size_t j = 0; j + 1 < g.n[1]; ++j) {
      for (std::size_t i = 0; i + 1 < g.n[0]; ++i) {
        const std::size_t a = g.index(i, j), b = g.index(i + 1, j);
        const std::size_t cc = g.index(i + 1, j + 1), dd = g.index(i, j + 1);
        {  // lower triangle (a, b, cc)
          const double gx = (u[b] - u[a]) / hx;
          const double gy = (u[cc] - u[b]) / hy;
          const double pt = (p[a] + p[b] + p[cc]) / 3.0;
          const double g2 = gx * gx + gy * gy;
          if constexpr (WantEnergy) E += area * psi(g2, pt, eps2);
          if constexpr (WantGradient) {
            const double sc = sigma_scale(g2, pt, eps2);
            const double fx = area * sc * gx / hx, fy = area * sc * gy / hy;
            grad_out->values[a] -= fx;
            grad_out->values[b] += fx - fy;
            grad_out->values[cc] += fy;
          }
        }
        {  // upper triangle (a, cc, dd)
          const double gx = (u[cc] - u[dd]) / hx;
          const double gy = (u[dd] - u[a]) / hy;
          const double pt = (p[a] + p[cc] + p[dd]) / 3.0;
          const double g2 = gx * gx + gy * gy;
          if constexpr (WantEnergy) E += area * psi(g2, pt, eps2);
          if constexpr (WantGradient) {
            const double sc = sigma_scale(g2, pt, eps2);
            const double fx = area * sc * gx / hx, fy = area * sc * gy / hy;
            grad_out->values[cc] += fx;
            grad_out->values[dd] += fy - fx;
            grad_out->values[a] -= fy;
          }
        }
      }
    }
  }

  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    const double w = g.weight(idx);
    if constexpr (WantEnergy) E -= w * rhs[idx] * u[idx];
    if constexpr (WantGradient) {
      if (g.is_boundary(idx))
        grad_out->values[idx] = 0.0;  // boundary values are data, not unknowns
      else
        grad_out->values[idx] -= w * rhs[idx];
    }
  }
  if constexpr (WantEnergy) *energy_out = static_cast<double>(E);
}

inline void require_zero_boundary(const ScalarField& u, const char* what) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.grid.is_boundary(i) && u[i] != 0.0)
      throw std::invalid_argument(std::string(what) + ": field not zero on boundary node " +
                                  std::to_string(i));
}

}  // namespace detail

//! Regularized Dirichlet energy
//!   E(u) = int (1/p(x)) |grad u|^{p(x)} - int rhs u
//! evaluated with cell-based gradients. u must vanish on boundary nodes.
inline double energy(const ScalarField& u, const ScalarField& p, const ScalarField& rhs,
                     double eps_reg = 1e-8) {
  require_same_grid(u, p, "energy");
  require_same_grid(u, rhs, "energy");
  detail::require_zero_boundary(u, "energy");
  double E = 0.0;
  detail::energy_kernel<true, false>(u, p, rhs, eps_reg, &E, nullptr);
  return E;
}

//! Exact derivative of energy() with respect to the nodal values: the
//! discrete weak residual of -div(|grad u|^{p-2} grad u) = rhs tested with
//! nodal hat functions. Zero on boundary nodes.
inline ScalarField energy_gradient(const ScalarField& u, const ScalarField& p,
                                   const ScalarField& rhs, double eps_reg = 1e-8) {
  require_same_grid(u, p, "energy_gradient");
  require_same_grid(u, rhs, "energy_gradient");
  ScalarField grad(u.grid);
  detail::energy_kernel<false, true>(u, p, rhs, eps_reg, nullptr, &grad);
  return grad;
}

//! Convex minimization of the Dirichlet energy: Barzilai-Borwein step seeding
//! with Armijo backtracking. Stops when the sup norm of the weak residual
//! over interior nodes drops below prob.tol. When a candidate step changes
//! the energy by less than it can be resolved in double precision the step is
//! accepted as is; the recorded energy trace is then flat to rounding.
inline EnergyReport solve_dirichlet(const DirichletProblem& prob, const ScalarField& init) {
  require_same_grid(init, prob.p, "solve_dirichlet");
  detail::require_zero_boundary(init, "solve_dirichlet");
  require_finite(init, "solve_dirichlet init");

  const std::size_t n = init.size();
  ScalarField u = init;
  ScalarField grad = energy_gradient(u, prob.p, prob.rhs, prob.eps_reg);
  double E = energy(u, prob.p, prob.rhs, prob.eps_reg);
  double gn = sup_norm_interior(grad);

  EnergyReport rep;
  rep.energy_trace.reserve(256);
  rep.energy_trace.push_back(E);

  std::vector<double> u_prev(n, 0.0), g_prev(n, 0.0);
  bool have_prev = false;
  double step = 1.0;
  long iter = 0;
  const double c_armijo = 1e-4;

  while (iter < prob.max_iter && gn > prob.tol) {
    double gnorm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) gnorm2 += grad[i] * grad[i];
    if (gnorm2 == 0.0) break;

    double step_safe = 0.0;  // curvature-matched step (sy/yy), shorter than ss/sy
    if (have_prev) {
      double ss = 0.0, sy = 0.0, yy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double si = u[i] - u_prev[i];
        const double yi = grad[i] - g_prev[i];
        ss += si * si;
        sy += si * yi;
        yy += yi * yi;
      }
      step = (sy > 0.0 && ss > 0.0) ? ss / sy : 2.0 * step;
      if (sy > 0.0 && yy > 0.0) step_safe = sy / yy;
    }
    step = std::min(std::max(step, 1e-14), 1e14);

    for (std::size_t i = 0; i < n; ++i) {
      u_prev[i] = u[i];
      g_prev[i] = grad[i];
    }

    ScalarField trial(u.grid);
    double t = step, E_new = E;
    // below this, energy differences drown in rounding; fall back to the
    // curvature-matched step instead of trusting an unverifiable long one
    const double resolvable = 1e-16 * (std::abs(E) + 1.0);
    if (t * gnorm2 < resolvable && step_safe > 0.0) t = std::min(t, step_safe);
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] - t * grad[i];
      E_new = energy(trial, prob.p, prob.rhs, prob.eps_reg);
      if (std::isfinite(E_new) &&
          (E_new <= E - c_armijo * t * gnorm2 || t * gnorm2 < resolvable))
        break;
      t *= 0.5;
    }
    u = trial;
    E = E_new;
    grad = energy_gradient(u, prob.p, prob.rhs, prob.eps_reg);
    gn = sup_norm_interior(grad);
    have_prev = true;
    ++iter;
    rep.energy_trace.push_back(E);
  }

  rep.minimizer = u;
  rep.energy = E;
  rep.grad_norm = gn;
  rep.iterations = iter;
  rep.converged = gn <= prob.tol;
  return rep;
}

inline EnergyReport solve_dirichlet(const DirichletProblem& prob) {
  return solve_dirichlet(prob, ScalarField(prob.grid, 0.0));
}

//! Torsion function z_lambda: -div(|grad z|^{p(x)-2} grad z) = lambda with
//! zero boundary data. Throws when the inner solve fails.
inline ScalarField torsion(double lambda, const ScalarField& p, const Grid& grid,
                           const SolverOptions& opts = {}) {
  if (!(lambda > 0.0)) throw std::invalid_argument("torsion: lambda must be > 0");
  const auto prob = DirichletProblem::make(grid, p, constant_field(grid, lambda), opts);
  EnergyReport rep = solve_dirichlet(prob);
  if (!rep.converged)
    throw std::runtime_error("torsion: solver did not converge (lambda=" +
                             std::to_string(lambda) + ", residual=" +
                             std::to_string(rep.grad_norm) + " after " +
                             std::to_string(rep.iterations) + " iterations)");
  return rep.minimizer;
}

//! Post-hoc nodewise ordering check backing the weak comparison principle.
struct OrderingReport {
  double max_gap = 0.0;                 // max over nodes of u - v
  std::vector<std::size_t> violations;  // nodes with u > v + tol
  bool ordered = true;
};

inline OrderingReport compare_weak(const ScalarField& u, const ScalarField& v,
                                   double tol = 1e-8) {
  require_same_grid(u, v, "compare_weak");
  OrderingReport rep;
  rep.max_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double gap = u[i] - v[i];
    rep.max_gap = std::max(rep.max_gap, gap);
    if (gap > tol) rep.violations.push_back(i);
  }
  rep.ordered = rep.violations.empty();
  return rep;
}

}  // namespace varexp

#endif  // VAREXP_PLAPLACE_HPP
