#ifndef VAREXP_APPLICATIONS_HPP
#define VAREXP_APPLICATIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "varexp/constructions.hpp"
#include "varexp/grid.hpp"
#include "varexp/modular.hpp"
#include "varexp/plaplace.hpp"
#include "varexp/subsuper.hpp"

namespace varexp {

namespace detail {

//! Node index of a coordinate that coincides with a grid node (the
//! coefficient callbacks are only ever evaluated at node coordinates).
inline std::size_t nearest_node(const Grid& g, const Point& x) {
  const auto clamp_idx = [](double v, std::size_t n) {
    const long i = std::lround(v);
    return std::size_t(std::clamp(i, 0l, long(n) - 1));
  };
  const std::size_t i = clamp_idx((x[0] - g.extents[0][0]) / g.h[0], g.n[0]);
  if (g.dim == 1) return g.index(i);
  const std::size_t j = clamp_idx((x[1] - g.extents[1][0]) / g.h[1], g.n[1]);
  return g.index(i, j);
}

}  // namespace detail

//! t -> t^{e(x)} with the exponent sampled from a nodal field; negative t is
//! clamped to zero so fractional powers stay real.
inline CoefficientFn make_power_coefficient(const Grid& grid, ScalarField exponent) {
  return [grid, expo = std::move(exponent)](const Point& x, double t) {
    return std::pow(std::max(t, 0.0), expo[detail::nearest_node(grid, x)]);
  };
}

inline CoefficientFn zero_coefficient() {
  return [](const Point&, double) { return 0.0; };
}

//! Samples f and g over [0, t_max] at every node and rejects negative values
//! (both must be nonnegative up to the sup of the supersolution).
inline void require_fg_nonnegative(const NonlocalProblem& prob, double t_max,
                                   int samples = 256) {
  const Grid& g = prob.grid;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Point x = g.coord(i);
    for (int k = 0; k < samples; ++k) {
      const double t = t_max * k / double(samples - 1);
      if (prob.f(x, t) < 0.0)
        throw std::runtime_error("require_fg_nonnegative: f(x, " + std::to_string(t) +
                                 ") < 0 at node " + std::to_string(i) +
                                 "; f must be nonnegative on [0, |sup|_inf]");
      if (prob.g(x, t) < 0.0)
        throw std::runtime_error("require_fg_nonnegative: g(x, " + std::to_string(t) +
                                 ") < 0 at node " + std::to_string(i) +
                                 "; g must be nonnegative on [0, |sup|_inf]");
    }
  }
}

enum class SublinearCase { A1, A2 };

struct PipelineOptions {
  double a0 = 1.0;       // case A1: lower bound of A; case A2: upper bound
  double K_knob = 2.0;   // torsion sup-bound constant, raised when the empirical bound fails
  double delta = 0.0;    // boundary strip of phi; 0 means inradius/4
  double k_cap = 65536.0;
  double a_limit = 0.0;  // case A2: limit of A at t -> infinity
  double a1_hint = 0.0;  // case A2: point past which A >= a_limit/2 (0 = search)
  double tol_fp = 1e-6;
  long max_outer = 200;
  int probe_count = 3;
  SolverOptions solver;

  SolverOptions construction_solver() const {
    SolverOptions s = solver;
    s.tol = std::min(s.tol, 1e-10);
    s.max_iter = std::max(s.max_iter, 200000l);
    return s;
  }
};

namespace detail {

struct TorsionWithBound {
  ScalarField z;
  double lambda = 0.0;
  double K = 0.0;
};

//! Torsion solve at the selected level with the empirical sup bound
//! |z|_inf <= K lambda^{1/(p- - 1)}; K is raised and the level reselected
//! until the bound holds.
inline TorsionWithBound torsion_with_bound(const NonlocalProblem& prob, double K_start,
                                           double denom, const SolverOptions& opts) {
  double K = K_start;
  for (int tries = 0; tries < 40; ++tries) {
    const LambdaSelection lam = select_lambda_sublinear(prob, K, denom);
    ScalarField z = torsion(lam.lambda, prob.exponents.p, prob.grid, opts);
    const double growth = std::pow(lam.lambda, 1.0 / (prob.exponents.p_minus - 1.0));
    const double zmax = max_value(z);
    if (zmax <= K * growth) return {std::move(z), lam.lambda, K};
    K = std::max(2.0 * K, 1.05 * zmax / growth);
  }
  throw SelectorError("torsion_with_bound: could not validate |z|_inf <= K lambda^{1/(p- - 1)}");
}

}  // namespace detail

struct SublinearRun {
  NonlocalProblem prob;
  SubSuperPair pair;
  PhiParams phi_params;
  double lambda = 0.0;
  double K_used = 0.0;
  double A_lambda = 0.0;     // k-search denominator (max of A in A1, a0 in A2)
  double lambda_denom = 0.0; // lambda-selector denominator (a0 in A1, tail floor in A2)
  PairReport pair_report;
  SolveReport solve;
};

//! End-to-end pipeline for -A(x,|u|_r) lap_p u = u^{beta(x)} |u|_q^{alpha(x)}:
//! selects lambda and k, builds the pair (mu phi, z_lambda), verifies the
//! bracket inequalities and runs the Picard iteration.
inline SublinearRun run_sublinear(const Grid& grid, const ExponentSet& exps,
                                  const CoefficientFn& A, const PipelineOptions& opts,
                                  SublinearCase which = SublinearCase::A1) {
  if (!(opts.a0 > 0.0)) throw std::invalid_argument("run_sublinear: a0 must be > 0");
  if (exps.beta_minus < 0.0)
    throw std::invalid_argument("run_sublinear: beta must be nonnegative");

  NonlocalProblem prob{grid, exps, A, make_power_coefficient(grid, exps.beta),
                       zero_coefficient(), 1.0, 1.0, opts.solver};
  const SolverOptions copts = opts.construction_solver();

  SublinearRun run;
  KSelection ksel;
  detail::TorsionWithBound tw;

  if (which == SublinearCase::A1) {
    // lambda first (needs only a0), then the k-search against the max of A
    // over [0, |z_lambda|_{r(x)}].
    run.lambda_denom = opts.a0;
    tw = detail::torsion_with_bound(prob, opts.K_knob, run.lambda_denom, copts);
    const double nr = luxemburg_norm(tw.z, exps.r);
    run.A_lambda = sample_coeff_max(A, grid, 0.0, nr);
    if (!(run.A_lambda > 0.0))
      throw SelectorError("run_sublinear: A has no positive max on [0, |z|_r]");
    KSearchSettings ks;
    ks.rhs_scale = 1.0 / run.A_lambda;
    ks.comparison_cap = 1.0;
    ks.delta = opts.delta;
    ks.k_cap = opts.k_cap;
    ks.eps_reg = opts.solver.eps_reg;
    ksel = select_k_sublinear(prob, ks);
  } else {
    // k first against the upper bound a0, then the tail floor of A feeds the
    // lambda selection.
    if (!(opts.a_limit > 0.0))
      throw std::invalid_argument("run_sublinear: case A2 needs a positive a_limit");
    KSearchSettings ks;
    ks.rhs_scale = 1.0 / opts.a0;
    ks.comparison_cap = 1.0;
    ks.delta = opts.delta;
    ks.k_cap = opts.k_cap;
    ks.eps_reg = opts.solver.eps_reg;
    ksel = select_k_sublinear(prob, ks);
    run.A_lambda = opts.a0;
    const double nr_sub = luxemburg_norm(ksel.sub, exps.r);
    const TailFloor tf = coeff_tail_floor(A, grid, nr_sub, opts.a_limit, opts.a1_hint);
    run.lambda_denom = tf.value;
    tw = detail::torsion_with_bound(prob, opts.K_knob, run.lambda_denom, copts);
  }

  run.phi_params = ksel.params;
  run.lambda = tw.lambda;
  run.K_used = tw.K;
  run.pair = SubSuperPair::make(ksel.sub, std::move(tw.z));
  if (!run.pair.sub_positive_interior())
    throw SelectorError("run_sublinear: subsolution is not strictly positive inside");
  require_fg_nonnegative(prob, max_value(run.pair.sup));
  run.pair_report = verify_pair(run.pair, prob, opts.probe_count);
  run.solve = fixed_point(prob, run.pair, opts.tol_fp, opts.max_outer, run.pair.sub);
  run.prob = std::move(prob);
  return run;
}

struct ConcaveConvexRun {
  NonlocalProblem prob;
  SubSuperPair pair;
  PhiParams phi_params;
  double lambda = 0.0;
  double theta = 0.0;
  double M = 0.0;
  double psi_at_M = 0.0;
  double A_lambda = 0.0;
  double Cbar = 0.0;
  double K_used = 0.0;
  PairReport pair_report;
  SolveReport solve;
};

//! Concave-convex pipeline (A at most a0, tending to a_limit): for a given
//! lambda the admissible theta must keep Psi(M) <= 1 and M >= 1; the pair is
//! (mu phi, z_M) with M from the closed-form minimizer of Psi.
inline ConcaveConvexRun run_concave_convex(const Grid& grid, const ExponentSet& exps,
                                           const CoefficientFn& A, double lambda, double theta,
                                           const PipelineOptions& opts) {
  if (!(lambda > 0.0 && theta > 0.0))
    throw std::invalid_argument("run_concave_convex: lambda and theta must be > 0");
  if (!(opts.a0 > 0.0)) throw std::invalid_argument("run_concave_convex: a0 must be > 0");
  if (!(opts.a_limit > 0.0))
    throw std::invalid_argument("run_concave_convex: needs a positive a_limit");
  if (exps.beta_minus < 0.0 || exps.eta_minus < 0.0)
    throw std::invalid_argument("run_concave_convex: beta and eta must be nonnegative");

  NonlocalProblem prob{grid,
                       exps,
                       A,
                       make_power_coefficient(grid, exps.beta),
                       make_power_coefficient(grid, exps.eta),
                       lambda,
                       theta,
                       opts.solver};
  const SolverOptions copts = opts.construction_solver();

  KSearchSettings ks;
  ks.rhs_scale = lambda / opts.a0;
  ks.comparison_cap = 1.0;
  ks.delta = opts.delta;
  ks.k_cap = opts.k_cap;
  ks.eps_reg = opts.solver.eps_reg;
  const KSelection ksel = select_k_sublinear(prob, ks);

  const double nr_sub = luxemburg_norm(ksel.sub, exps.r);
  const TailFloor tf = coeff_tail_floor(A, grid, nr_sub, opts.a_limit, opts.a1_hint);

  ConcaveConvexRun run;
  run.phi_params = ksel.params;
  run.lambda = lambda;
  run.theta = theta;
  run.A_lambda = tf.value;

  double K = opts.K_knob;
  ScalarField z;
  MSelection msel;
  for (int tries = 0;; ++tries) {
    if (tries >= 40)
      throw SelectorError("run_concave_convex: could not validate the torsion sup bound");
    const double nKq = luxemburg_norm(constant_field(grid, K), exps.q);
    const double nKs = luxemburg_norm(constant_field(grid, K), exps.s);
    const double Kbar = std::max(std::max(std::pow(nKq, exps.alpha_minus),
                                          std::pow(nKq, exps.alpha_plus)),
                                 std::max(std::pow(nKs, exps.gamma_minus),
                                          std::pow(nKs, exps.gamma_plus)));
    run.Cbar = std::max(std::pow(K, exps.beta_plus), std::pow(K, exps.eta_plus)) * Kbar;
    msel = select_M_concave(lambda, theta, exps, run.A_lambda, run.Cbar);
    if (!msel.admissible)
      throw SelectorError("run_concave_convex: Psi(M) = " + std::to_string(msel.psi_at_M) +
                          " > 1; theta = " + std::to_string(theta) +
                          " is too large for lambda = " + std::to_string(lambda));
    if (msel.M < 1.0)
      throw SelectorError("run_concave_convex: M = " + std::to_string(msel.M) +
                          " < 1; theta is too large for the comparison step");
    z = torsion(msel.M, exps.p, grid, copts);
    const double growth = std::pow(msel.M, 1.0 / (exps.p_minus - 1.0));
    const double zmax = max_value(z);
    if (zmax <= K * growth) break;
    K = std::max(2.0 * K, 1.05 * zmax / growth);
  }
  run.M = msel.M;
  run.psi_at_M = msel.psi_at_M;
  run.K_used = K;

  run.pair = SubSuperPair::make(ksel.sub, std::move(z));
  if (!run.pair.sub_positive_interior())
    throw SelectorError("run_concave_convex: subsolution is not strictly positive inside");
  require_fg_nonnegative(prob, max_value(run.pair.sup));
  run.pair_report = verify_pair(run.pair, prob, opts.probe_count);
  run.solve = fixed_point(prob, run.pair, opts.tol_fp, opts.max_outer, run.pair.sub);
  run.prob = std::move(prob);
  return run;
}

struct LogisticRun {
  NonlocalProblem prob;
  SubSuperPair pair;
  LogisticSeed seed;
  Lambda0Selection l0;
  double lambda = 0.0;  // lambda_multiplier * lambda0
  PairReport pair_report;
  SolveReport solve;
  bool seed_ok = false;
};

//! Logistic pipeline: z0 minimizes the truncated functional, lambda0 comes
//! from the norm floor of z0, and the pair is (z0, theta). f must satisfy
//! f(0) = f(theta) = 0 with f > 0 between.
inline LogisticRun run_logistic(const Grid& grid, const ExponentSet& exps,
                                const CoefficientFn& A, const std::function<double(double)>& f,
                                double theta, double lambda_tilde, double lambda_multiplier,
                                const PipelineOptions& opts) {
  if (!(theta > 0.0)) throw std::invalid_argument("run_logistic: theta must be > 0");
  if (!(lambda_multiplier >= 1.0))
    throw std::invalid_argument("run_logistic: the lambda multiplier must be >= 1 (the bracket "
                                "inequalities hold for lambda >= lambda0)");
  const double f_scale = std::max({std::abs(f(0.0)), std::abs(f(theta)),
                                   std::abs(f(0.5 * theta)), 1.0});
  if (std::abs(f(0.0)) > 1e-12 * f_scale || std::abs(f(theta)) > 1e-12 * f_scale)
    throw std::invalid_argument("run_logistic: need f(0) = f(theta) = 0");
  for (int k = 1; k < 256; ++k) {
    const double t = theta * k / 256.0;
    if (!(f(t) > 0.0))
      throw std::invalid_argument("run_logistic: need f > 0 on (0, theta); f(" +
                                  std::to_string(t) + ") = " + std::to_string(f(t)));
  }

  // truncation: the Picard right-hand side sees f only through [0, theta]
  const auto f_trunc = [f, theta](const Point&, double t) {
    return (t >= 0.0 && t <= theta) ? f(t) : 0.0;
  };

  NonlocalProblem prob{grid, exps, A, f_trunc, zero_coefficient(), 1.0, 1.0, opts.solver};

  LogisticRun run;
  run.seed = build_logistic_z0(grid, exps.p, f, theta, lambda_tilde,
                               opts.construction_solver());
  run.seed_ok = run.seed.ok;
  if (!run.seed.ok) {
    run.prob = std::move(prob);
    return run;  // lambda_tilde too small; caller reports the probe energies
  }

  run.l0 = select_lambda0_logistic(run.seed.z0, prob, theta, lambda_tilde);
  run.lambda = lambda_multiplier * run.l0.lambda0;
  prob.lambda_scale = run.lambda;

  run.pair = SubSuperPair::make(run.seed.z0, constant_field(grid, theta));
  if (!run.pair.sub_positive_interior())
    throw SelectorError("run_logistic: z0 is not strictly positive inside");
  require_fg_nonnegative(prob, theta);
  run.pair_report = verify_pair(run.pair, prob, opts.probe_count);
  run.solve = fixed_point(prob, run.pair, opts.tol_fp, opts.max_outer, run.pair.sub);
  run.prob = std::move(prob);
  return run;
}

struct CustomRun {
  NonlocalProblem prob;
  SubSuperPair pair;
  PhiParams phi_params;
  double lambda = 0.0;
  PairReport pair_report;
  SolveReport solve;
};

//! No selectors: the caller supplies k and the torsion level directly and
//! the pair is (mu phi_k, z_lambda). The pair verification report says
//! whether the supplied data actually brackets the problem.
inline CustomRun run_custom(const Grid& grid, const ExponentSet& exps, const CoefficientFn& A,
                            const CoefficientFn& f, const CoefficientFn& g, double lambda_scale,
                            double theta_scale, double k, double lambda,
                            const PipelineOptions& opts) {
  if (!(k > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("run_custom: k and lambda must be > 0");
  NonlocalProblem prob{grid, exps, A, f, g, lambda_scale, theta_scale, opts.solver};
  const double delta = opts.delta > 0.0 ? opts.delta : grid.inradius() / 4.0;
  const PhiParams prm = make_phi_params(k, delta, grid, exps.p);
  ScalarField sub = build_phi(prm, grid, exps.p);
  for (auto& v : sub.values) v *= prm.mu;
  ScalarField sup = torsion(lambda, exps.p, grid, opts.construction_solver());

  CustomRun run;
  run.pair = SubSuperPair::make(std::move(sub), std::move(sup));
  run.phi_params = prm;
  run.lambda = lambda;
  require_fg_nonnegative(prob, max_value(run.pair.sup));
  run.pair_report = verify_pair(run.pair, prob, opts.probe_count);
  run.solve = fixed_point(prob, run.pair, opts.tol_fp, opts.max_outer, run.pair.sub);
  run.prob = std::move(prob);
  return run;
}

}  // namespace varexp

#endif  // VAREXP_APPLICATIONS_HPP
