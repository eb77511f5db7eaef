#ifndef VAREXP_SUBSUPER_HPP
#define VAREXP_SUBSUPER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "varexp/grid.hpp"
#include "varexp/modular.hpp"
#include "varexp/plaplace.hpp"

namespace varexp {

//! Coefficient of the problem, evaluable at any node coordinate and scalar
//! second argument (t >= 0 in every use below).
using CoefficientFn = std::function<double(const Point&, double)>;

//! Data of the nonlocal problem
//!   -A(x, |u|_{r(x)}) div(|grad u|^{p(x)-2} grad u)
//!       = lambda_scale f(x,u) |u|_{q(x)}^{alpha(x)}
//!       + theta_scale  g(x,u) |u|_{s(x)}^{gamma(x)},   u = 0 on the boundary.
struct NonlocalProblem {
  Grid grid;
  ExponentSet exponents;
  CoefficientFn A;
  CoefficientFn f;
  CoefficientFn g;
  double lambda_scale = 1.0;
  double theta_scale = 1.0;
  SolverOptions solver;
};

//! Ordered bracket (sub, sup). Construction enforces sub <= sup nodewise,
//! sub = 0 <= sup on boundary nodes; strict interior positivity of sub is a
//! property of the built pairs, checked where a construction promises it.
struct SubSuperPair {
  ScalarField sub, sup;

  static SubSuperPair make(ScalarField sub, ScalarField sup) {
    require_same_grid(sub, sup, "SubSuperPair");
    require_finite(sub, "SubSuperPair sub");
    require_finite(sup, "SubSuperPair sup");
    for (std::size_t i = 0; i < sub.size(); ++i) {
      if (sub[i] > sup[i])
        throw std::invalid_argument("SubSuperPair: sub > sup at node " + std::to_string(i));
      if (sub.grid.is_boundary(i)) {
        if (sub[i] != 0.0)
          throw std::invalid_argument("SubSuperPair: sub nonzero on boundary node " +
                                      std::to_string(i));
        if (sup[i] < 0.0)
          throw std::invalid_argument("SubSuperPair: sup negative on boundary node " +
                                      std::to_string(i));
      }
    }
    return SubSuperPair{std::move(sub), std::move(sup)};
  }

  bool sub_positive_interior() const {
    for (std::size_t i = 0; i < sub.size(); ++i)
      if (!sub.grid.is_boundary(i) && !(sub[i] > 0.0)) return false;
    return true;
  }
};

//! Nodewise clamp of u into [sub, sup].
inline ScalarField truncate(const ScalarField& u, const SubSuperPair& pair) {
  require_same_grid(u, pair.sub, "truncate");
  ScalarField out = u;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp(out[i], pair.sub[i], pair.sup[i]);
  return out;
}

namespace detail {

//! Nodewise right-hand side with the three global norms supplied by the
//! caller; norm_r feeds A and may belong to a different field w than v.
inline ScalarField nonlocal_rhs_impl(const ScalarField& v, const NonlocalProblem& prob,
                                     double norm_q, double norm_s, double norm_r) {
  const Grid& g = v.grid;
  ScalarField out(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Point x = g.coord(i);
    const double a = prob.A(x, norm_r);
    if (!(a > 0.0))
      throw std::runtime_error(
          "nonlocal_rhs: A(x, t) = " + std::to_string(a) + " at node " + std::to_string(i) +
          ", t = " + std::to_string(norm_r) +
          "; A must be positive on [|sub|_{r(x)}, |sup|_{r(x)}]");
    const double fi = prob.lambda_scale * prob.f(x, v[i]) *
                      std::pow(norm_q, prob.exponents.alpha[i]);
    const double gi = prob.theta_scale * prob.g(x, v[i]) *
                      std::pow(norm_s, prob.exponents.gamma[i]);
    out[i] = (fi + gi) / a;
  }
  require_finite(out, "nonlocal_rhs");
  return out;
}

}  // namespace detail

//! H(v): the nonlocal right-hand side evaluated at v. The three Luxemburg
//! norms of v are global scalars computed once per call.
inline ScalarField nonlocal_rhs(const ScalarField& v, const NonlocalProblem& prob) {
  require_same_grid(v, prob.exponents.p, "nonlocal_rhs");
  const double nq = luxemburg_norm(v, prob.exponents.q);
  const double ns = luxemburg_norm(v, prob.exponents.s);
  const double nr = luxemburg_norm(v, prob.exponents.r);
  return detail::nonlocal_rhs_impl(v, prob, nq, ns, nr);
}

//! A priori bound on |H(T v)| over all v (the K0 of the truncation
//! argument): extremes of the norms under the pointwise order, dense
//! sampling of A, f, g over the compact brackets they are evaluated on.
inline double rhs_bound(const SubSuperPair& pair, const NonlocalProblem& prob,
                        int samples = 1024) {
  const Grid& g = pair.sub.grid;
  const double nq_lo = luxemburg_norm(pair.sub, prob.exponents.q);
  const double nq_hi = luxemburg_norm(pair.sup, prob.exponents.q);
  const double ns_lo = luxemburg_norm(pair.sub, prob.exponents.s);
  const double ns_hi = luxemburg_norm(pair.sup, prob.exponents.s);
  const double nr_lo = luxemburg_norm(pair.sub, prob.exponents.r);
  const double nr_hi = luxemburg_norm(pair.sup, prob.exponents.r);

  double a_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Point x = g.coord(i);
    for (int k = 0; k < samples; ++k) {
      const double t = nr_lo + (nr_hi - nr_lo) * k / double(samples - 1);
      a_min = std::min(a_min, prob.A(x, t));
    }
  }
  if (!(a_min > 0.0))
    throw std::runtime_error("rhs_bound: A attains " + std::to_string(a_min) +
                             " on the bracket; positivity on "
                             "[|sub|_{r(x)}, |sup|_{r(x)}] is required");

  double bound = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Point x = g.coord(i);
    double f_max = 0.0, g_max = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double t = pair.sub[i] + (pair.sup[i] - pair.sub[i]) * k / double(samples - 1);
      f_max = std::max(f_max, std::abs(prob.f(x, t)));
      g_max = std::max(g_max, std::abs(prob.g(x, t)));
    }
    const double ai = prob.exponents.alpha[i];
    const double gi = prob.exponents.gamma[i];
    const double nq_pow = std::max(std::pow(nq_lo, ai), std::pow(nq_hi, ai));
    const double ns_pow = std::max(std::pow(ns_lo, gi), std::pow(ns_hi, gi));
    bound = std::max(bound, (std::abs(prob.lambda_scale) * f_max * nq_pow +
                             std::abs(prob.theta_scale) * g_max * ns_pow) /
                                a_min);
  }
  return bound;
}

struct SResult {
  ScalarField u;
  double rhs_sup = 0.0;  // sup-node |H(T v)| of this application
  long inner_iterations = 0;
};

//! Solution operator S(v): one Dirichlet solve against H(truncate(v)).
//! The inner tolerance is capped at a small fraction of the weighted
//! forcing scale, otherwise a warm start near a tiny iterate would satisfy
//! the absolute tolerance untouched and S would degenerate to the identity
//! below resolution. Inner-solver failure is an error with context.
inline SResult solve_S(const ScalarField& v, const NonlocalProblem& prob,
                       const SubSuperPair& pair, const SolverOptions& opts) {
  const ScalarField w = truncate(v, pair);
  ScalarField rhs = nonlocal_rhs(w, prob);
  const double k0 = sup_norm(rhs);
  double forcing_scale = 0.0;
  for (std::size_t i = 0; i < rhs.size(); ++i)
    if (!rhs.grid.is_boundary(i))
      forcing_scale = std::max(forcing_scale, rhs.grid.weight(i) * std::abs(rhs[i]));
  SolverOptions eff = opts;
  eff.tol = std::min(opts.tol, std::max(0.01 * forcing_scale, 1e-12));
  const auto dp = DirichletProblem::make(prob.grid, prob.exponents.p, std::move(rhs), eff);
  ScalarField warm = w;
  for (std::size_t i = 0; i < warm.size(); ++i)
    if (warm.grid.is_boundary(i)) warm[i] = 0.0;
  EnergyReport rep = solve_dirichlet(dp, warm);
  if (!rep.converged)
    throw std::runtime_error("solve_S: inner solve stalled at residual " +
                             std::to_string(rep.grad_norm) + " (tol " + std::to_string(opts.tol) +
                             ") after " + std::to_string(rep.iterations) + " iterations");
  return SResult{std::move(rep.minimizer), k0, rep.iterations};
}

inline SResult solve_S(const ScalarField& v, const NonlocalProblem& prob,
                       const SubSuperPair& pair) {
  return solve_S(v, prob, pair, prob.solver);
}

struct OuterIteration {
  long iter = 0;
  double fp_residual = 0.0;
  long inner_iters = 0;
  double rhs_sup = 0.0;
};

struct SolveReport {
  ScalarField solution;
  long iterations = 0;
  bool converged = false;
  bool ordering_ok = false;
  double K0 = 0.0;  // a priori bound on |H(T v)| from the pair
  std::vector<OuterIteration> trace;

  std::vector<double> residual_trace() const {
    std::vector<double> r;
    r.reserve(trace.size());
    for (const auto& t : trace) r.push_back(t.fp_residual);
    return r;
  }
};

//! Picard iteration u_{k+1} = S(u_k), the computable stand-in for the
//! fixed-point existence argument. Stops once the sup-node increment stays
//! below tol_fp for two consecutive applications of S without exploding
//! between them: near a tiny start the map is strongly sublinear and the
//! iterate climbs by orders of magnitude per step while each single
//! increment still looks small, and that crawl shows up as geometrically
//! growing increments. After stopping, checks the bracket inclusion
//! sub - 1e-8 <= u <= sup + 1e-8. Non-convergence within max_outer is
//! reported, never silently accepted; nothing guarantees Picard converges
//! for every admissible coefficient.
inline SolveReport fixed_point(const NonlocalProblem& prob, const SubSuperPair& pair,
                               double tol_fp, long max_outer, const ScalarField& start) {
  require_same_grid(start, pair.sub, "fixed_point");
  if (!(tol_fp > 0.0)) throw std::invalid_argument("fixed_point: tol_fp must be > 0");

  SolverOptions inner = prob.solver;
  inner.tol = std::min(inner.tol, tol_fp / 10.0);  // keep outer stagnation above inner noise

  SolveReport rep;
  rep.K0 = rhs_bound(pair, prob);
  ScalarField u = start;
  int settled = 0;
  double res_prev = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= max_outer; ++k) {
    SResult s = solve_S(u, prob, pair, inner);
    double res = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) res = std::max(res, std::abs(s.u[i] - u[i]));
    u = std::move(s.u);
    rep.trace.push_back({k, res, s.inner_iterations, s.rhs_sup});
    rep.iterations = k;
    settled = (res <= tol_fp && res <= 4.0 * res_prev) ? settled + 1 : 0;
    res_prev = res;
    if (settled >= 2) {
      rep.converged = true;
      break;
    }
  }
  rep.ordering_ok = true;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] < pair.sub[i] - 1e-8 || u[i] > pair.sup[i] + 1e-8) {
      rep.ordering_ok = false;
      break;
    }
  rep.solution = std::move(u);
  return rep;
}

inline SolveReport fixed_point(const NonlocalProblem& prob, const SubSuperPair& pair,
                               double tol_fp = 1e-6, long max_outer = 200) {
  return fixed_point(prob, pair, tol_fp, max_outer, pair.sub);
}

//! Signed worst-case violations of the two weak differential inequalities
//! over sampled weights w. Positive values mean the inequality failed by
//! that much in the weighted nodal residual.
struct PairReport {
  double sub_violation = 0.0;
  double sup_violation = 0.0;
  int probes = 0;

  bool ok(double tol = 1e-8) const { return sub_violation <= tol && sup_violation <= tol; }
};

//! Checks both bracket inequalities with nonnegative nodal test functions.
//! The weight w only enters through |w|_{r(x)}, which is monotone along the
//! segment between sub and sup, so extremes plus convex combinations probe
//! the whole family.
inline PairReport verify_pair(const SubSuperPair& pair, const NonlocalProblem& prob,
                              int probe_count = 3) {
  const Grid& g = pair.sub.grid;
  const ExponentSet& e = prob.exponents;

  const double nq_sub = luxemburg_norm(pair.sub, e.q);
  const double ns_sub = luxemburg_norm(pair.sub, e.s);
  const double nq_sup = luxemburg_norm(pair.sup, e.q);
  const double ns_sup = luxemburg_norm(pair.sup, e.s);

  std::vector<double> r_norms;
  r_norms.push_back(luxemburg_norm(pair.sub, e.r));
  r_norms.push_back(luxemburg_norm(pair.sup, e.r));
  ScalarField w(g);
  for (int k = 1; k <= probe_count; ++k) {
    const double t = double(k) / double(probe_count + 1);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      w[i] = t * pair.sub[i] + (1.0 - t) * pair.sup[i];
    r_norms.push_back(luxemburg_norm(w, e.r));
  }

  PairReport rep;
  rep.probes = static_cast<int>(r_norms.size());
  rep.sub_violation = -std::numeric_limits<double>::infinity();
  rep.sup_violation = -std::numeric_limits<double>::infinity();
  for (const double nr : r_norms) {
    const ScalarField rhs_sub = detail::nonlocal_rhs_impl(pair.sub, prob, nq_sub, ns_sub, nr);
    const ScalarField res_sub =
        energy_gradient(pair.sub, e.p, rhs_sub, prob.solver.eps_reg);
    const ScalarField rhs_sup = detail::nonlocal_rhs_impl(pair.sup, prob, nq_sup, ns_sup, nr);
    const ScalarField res_sup =
        energy_gradient(pair.sup, e.p, rhs_sup, prob.solver.eps_reg);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (g.is_boundary(i)) continue;
      rep.sub_violation = std::max(rep.sub_violation, res_sub[i]);
      rep.sup_violation = std::max(rep.sup_violation, -res_sup[i]);
    }
  }
  return rep;
}

}  // namespace varexp

#endif  // VAREXP_SUBSUPER_HPP
