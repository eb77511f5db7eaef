#ifndef VAREXP_CONSTRUCTIONS_HPP
#define VAREXP_CONSTRUCTIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "varexp/grid.hpp"
#include "varexp/modular.hpp"
#include "varexp/plaplace.hpp"
#include "varexp/subsuper.hpp"

namespace varexp {

//! A parameter search could not produce admissible values; the message says
//! which inequality blocked.
struct SelectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

//! Parameters of the boundary-layer subsolution phi. The derived fields obey
//! sigma = ln(2^{1/p+})/k, mu = exp(-a k) with a = (p- - 1)/(max|grad p| + 1),
//! so exp(k sigma) = 2^{1/p+} holds by construction.
struct PhiParams {
  double k = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  double a = 0.0;
};

inline double max_gradient_magnitude(const ScalarField& f) {
  const VectorField g = gradient(f);
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, g.magnitude(i));
  return m;
}

inline std::optional<PhiParams> try_make_phi_params(double k, double delta, const Grid& grid,
                                                    const ScalarField& p) {
  if (!(k > 0.0) || !(delta > 0.0)) return std::nullopt;
  if (3.0 * delta >= grid.inradius()) return std::nullopt;
  const double p_minus = min_value(p), p_plus = max_value(p);
  if (!(p_minus > 1.0)) return std::nullopt;
  PhiParams prm;
  prm.k = k;
  prm.delta = delta;
  prm.a = (p_minus - 1.0) / (max_gradient_magnitude(p) + 1.0);
  prm.sigma = std::log(2.0) / (p_plus * k);
  prm.mu = std::exp(-prm.a * k);
  if (!(prm.sigma < delta)) return std::nullopt;
  if (!(prm.k * prm.mu <= 1.0)) return std::nullopt;
  return prm;
}

inline PhiParams make_phi_params(double k, double delta, const Grid& grid,
                                 const ScalarField& p) {
  if (3.0 * delta >= grid.inradius())
    throw std::invalid_argument("make_phi_params: need 3*delta < inradius");
  auto prm = try_make_phi_params(k, delta, grid, p);
  if (!prm)
    throw std::invalid_argument("make_phi_params: invalid parameters (need k > 0, sigma < delta "
                                "and k*mu <= 1; try a larger k)");
  return *prm;
}

//! Pointwise value of the layer function at boundary distance d:
//!   exp(k d) - 1                                          for d < sigma,
//!   exp(k sigma) - 1 + int_sigma^d k e^{k sigma}
//!      ((2 delta - t)/(2 delta - sigma))^{2/(p- - 1)} dt   for sigma <= d < 2 delta,
//! constant beyond 2 delta. The middle integral is evaluated by adaptive
//! Simpson quadrature to 1e-10.
inline double phi_value(const PhiParams& prm, double d, double p_minus) {
  if (d < prm.sigma) return std::expm1(prm.k * d);
  const double m = 2.0 / (p_minus - 1.0);
  const double base = std::expm1(prm.k * prm.sigma);
  const double scale = prm.k * std::exp(prm.k * prm.sigma);
  const double span = 2.0 * prm.delta - prm.sigma;
  const double upper = std::min(d, 2.0 * prm.delta);
  const auto integrand = [&](double t) {
    return scale * std::pow((2.0 * prm.delta - t) / span, m);
  };
  return base + detail::adaptive_simpson(integrand, prm.sigma, upper, 1e-10);
}

//! Samples phi on the grid: zero exactly on boundary nodes, nondecreasing in
//! the boundary distance, constant where d >= 2 delta.
inline ScalarField build_phi(const PhiParams& prm, const Grid& grid, const ScalarField& p) {
  if (3.0 * prm.delta >= grid.inradius())
    throw std::invalid_argument("build_phi: need 3*delta < inradius");
  if (!(p.grid == grid)) throw std::invalid_argument("build_phi: grid mismatch");
  const double p_minus = min_value(p);
  const ScalarField d = distance_field(grid);
  ScalarField phi(grid);
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    phi[i] = grid.is_boundary(i) ? 0.0 : phi_value(prm, d[i], p_minus);
  require_finite(phi, "build_phi");
  return phi;
}

//! Extremes of A over grid nodes times a densely sampled t-bracket; the
//! sampled extremum stands in for the max/min over the compact set.
inline double sample_coeff_max(const CoefficientFn& A, const Grid& grid, double t_lo,
                               double t_hi, int samples = 1024) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const Point x = grid.coord(i);
    for (int k = 0; k < samples; ++k) {
      const double t = t_lo + (t_hi - t_lo) * k / double(samples - 1);
      m = std::max(m, A(x, t));
    }
  }
  return m;
}

inline double sample_coeff_min(const CoefficientFn& A, const Grid& grid, double t_lo,
                               double t_hi, int samples = 1024) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const Point x = grid.coord(i);
    for (int k = 0; k < samples; ++k) {
      const double t = t_lo + (t_hi - t_lo) * k / double(samples - 1);
      m = std::min(m, A(x, t));
    }
  }
  return m;
}

//! Lower bound for A on [t_lo, infinity) when A tends to a positive limit:
//! min of the sampled minimum on [t_lo, a1] and limit/2, where a1 is the
//! first doubling point past which A clears limit/2 everywhere.
struct TailFloor {
  double value = 0.0;
  double a1 = 0.0;
  double bracket_min = 0.0;
};

inline TailFloor coeff_tail_floor(const CoefficientFn& A, const Grid& grid, double t_lo,
                                  double limit, double a1_hint = 0.0) {
  if (!(limit > 0.0))
    throw std::invalid_argument("coeff_tail_floor: need a positive limit for A at t -> inf");
  double a1 = a1_hint;
  if (!(a1 > 0.0)) {
    a1 = std::max(1.0, t_lo);
    for (;; a1 *= 2.0) {
      if (a1 > 1e18)
        throw SelectorError("coeff_tail_floor: no a1 found with A >= limit/2 beyond it");
      double mn = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < grid.node_count(); ++i)
        mn = std::min(mn, A(grid.coord(i), a1));
      if (mn >= 0.5 * limit) break;
    }
  }
  TailFloor tf;
  tf.a1 = a1;
  tf.bracket_min = sample_coeff_min(A, grid, t_lo, a1);
  tf.value = std::min(tf.bracket_min, 0.5 * limit);
  if (!(tf.value > 0.0))
    throw SelectorError("coeff_tail_floor: A is not positive on [" + std::to_string(t_lo) +
                        ", inf); floor = " + std::to_string(tf.value));
  return tf;
}

//! Smallest lambda = 2^j (j >= 0) with c lambda^s <= lambda and lambda > 1.
//! Eventually satisfiable for s < 1.
inline double smallest_pow2_satisfying(double c, double s) {
  if (!(s < 1.0)) throw std::invalid_argument("smallest_pow2_satisfying: need s < 1");
  double lambda = 1.0;
  for (int j = 0; j < 1020; ++j, lambda *= 2.0)
    if (lambda > 1.0 && c * std::pow(lambda, s) <= lambda && std::isfinite(lambda))
      return lambda;
  throw SelectorError("smallest_pow2_satisfying: no finite power of two works (c = " +
                      std::to_string(c) + ", s = " + std::to_string(s) + ")");
}

struct LambdaSelection {
  double lambda = 0.0;
  double c = 0.0;  // collapsed constant of the threshold inequality
  double s = 0.0;  // exponent (alpha+ + beta+)/(p- - 1)
};

//! Torsion level for the sublinear supersolution: smallest power of two with
//!   (1/denom) K^{beta+} lambda^{(alpha+ + beta+)/(p- - 1)}
//!       max{|K|_{q(x)}^{alpha-}, |K|_{q(x)}^{alpha+}}  <=  lambda,
//! where |K|_{q(x)} is the Luxemburg norm of the constant-K field and denom
//! is the relevant lower bound of A.
inline LambdaSelection select_lambda_sublinear(const NonlocalProblem& prob, double K_knob,
                                               double denom) {
  const ExponentSet& e = prob.exponents;
  if (!(e.alpha_plus + e.beta_plus < e.p_minus - 1.0))
    throw std::invalid_argument("select_lambda_sublinear: need alpha+ + beta+ < p- - 1");
  if (!(K_knob > 1.0)) throw std::invalid_argument("select_lambda_sublinear: need K > 1");
  if (!(denom > 0.0))
    throw std::invalid_argument("select_lambda_sublinear: need a positive lower bound for A");
  const double normK = luxemburg_norm(constant_field(prob.grid, K_knob), e.q);
  LambdaSelection sel;
  sel.s = (e.alpha_plus + e.beta_plus) / (e.p_minus - 1.0);
  sel.c = std::pow(K_knob, e.beta_plus) *
          std::max(std::pow(normK, e.alpha_minus), std::pow(normK, e.alpha_plus)) / denom;
  sel.lambda = smallest_pow2_satisfying(sel.c, sel.s);
  return sel;
}

struct KSearchSettings {
  double rhs_scale = 1.0;       // multiplies (mu phi)^beta |mu phi|_q^alpha in the target bound
  double comparison_cap = 1.0;  // the torsion level the subsolution must sit under
  double delta = 0.0;           // boundary strip; 0 means inradius/4
  double k_start = 1.0;
  double k_cap = 65536.0;
  double eps_reg = 1e-8;
};

struct KSelection {
  PhiParams params;
  ScalarField phi;   // unscaled layer function
  ScalarField sub;   // mu * phi
  double norm_q = 0.0;
  long attempts = 0;
};

//! Doubling search on k until the discrete weak analogues of the subsolution
//! inequalities hold nodewise:
//!   (a) resid(mu phi) <= w_i rhs_scale (mu phi)^{beta} |mu phi|_{q(x)}^{alpha},
//!   (b) resid(mu phi) <= w_i comparison_cap,
//!   (c) mu phi <= 1 on the strip sigma < d < delta,
//! where resid is the weighted weak residual of the p(x)-Laplacian. Fails
//! with diagnostics of the blocking inequality once k exceeds the cap.
inline KSelection select_k_sublinear(const NonlocalProblem& prob, const KSearchSettings& st) {
  const Grid& grid = prob.grid;
  const ExponentSet& e = prob.exponents;
  if (!(e.alpha_plus + e.beta_plus < e.p_minus - 1.0))
    throw std::invalid_argument("select_k_sublinear: need alpha+ + beta+ < p- - 1");
  const double delta = st.delta > 0.0 ? st.delta : grid.inradius() / 4.0;
  if (3.0 * delta >= grid.inradius())
    throw std::invalid_argument("select_k_sublinear: need 3*delta < inradius");

  const ScalarField d = distance_field(grid);
  const ScalarField zero(grid, 0.0);
  std::string last_block = "no admissible k tried";
  long attempts = 0;

  for (double k = st.k_start; k <= st.k_cap; k *= 2.0) {
    ++attempts;
    const auto prm = try_make_phi_params(k, delta, grid, e.p);
    if (!prm) {
      last_block = "k = " + std::to_string(k) + ": parameter invariants (sigma < delta, k mu <= 1)";
      continue;
    }
    ScalarField phi = build_phi(*prm, grid, e.p);
    ScalarField sub = phi;
    for (auto& v : sub.values) v *= prm->mu;
    const double nq = luxemburg_norm(sub, e.q);
    const ScalarField resid = energy_gradient(sub, e.p, zero, st.eps_reg);

    bool ok = true;
    double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0;
    for (std::size_t i = 0; i < grid.node_count() && ok; ++i) {
      if (grid.is_boundary(i)) continue;
      const double w = grid.weight(i);
      const double bound_a =
          w * st.rhs_scale * std::pow(sub[i], e.beta[i]) * std::pow(nq, e.alpha[i]);
      if (resid[i] > bound_a) {
        ok = false;
        worst_a = resid[i] - bound_a;
      }
      if (resid[i] > w * st.comparison_cap) {
        ok = false;
        worst_b = resid[i] - w * st.comparison_cap;
      }
      if (prm->sigma < d[i] && d[i] < delta && sub[i] > 1.0) {
        ok = false;
        worst_c = sub[i] - 1.0;
      }
    }
    if (ok) {
      KSelection sel;
      sel.params = *prm;
      sel.phi = std::move(phi);
      sel.sub = std::move(sub);
      sel.norm_q = nq;
      sel.attempts = attempts;
      return sel;
    }
    last_block = "k = " + std::to_string(k) + ": blocked by " +
                 (worst_a > 0 ? "(a) power bound, excess " + std::to_string(worst_a)
                  : worst_b > 0 ? "(b) comparison cap, excess " + std::to_string(worst_b)
                                : "(c) mu phi <= 1 in the strip, excess " + std::to_string(worst_c));
  }
  throw SelectorError("select_k_sublinear: k exceeded cap " + std::to_string(st.k_cap) + "; " +
                      last_block);
}

//! Closed-form minimizer of Psi and its admissibility test.
struct MSelection {
  double M = 0.0;
  double psi_at_M = 0.0;
  bool admissible = false;  // Psi(M) <= 1
  double L = 0.0;           // prefactor of the closed form
};

//! Psi(t) = (lambda Cbar t^{(alpha+ + beta+)/(p- - 1) - 1}
//!           + theta Cbar t^{(eta+ + gamma+)/(p- - 1) - 1}) / A_lambda.
inline double concave_psi(double t, double lambda, double theta, const ExponentSet& e,
                          double A_lambda, double Cbar) {
  const double pm1 = e.p_minus - 1.0;
  const double ea = (e.alpha_plus + e.beta_plus) / pm1 - 1.0;
  const double eb = (e.eta_plus + e.gamma_plus) / pm1 - 1.0;
  return (lambda * Cbar * std::pow(t, ea) + theta * Cbar * std::pow(t, eb)) / A_lambda;
}

//! Global minimizer M of Psi by the closed form
//!   M = L (lambda/theta)^{(p- - 1)/((eta+ + gamma+) - (beta+ + alpha+))},
//!   L = (((p- - 1) - (beta+ + alpha+)) / ((eta+ + gamma+) - (p- - 1)))^{same exponent}.
//! Requires alpha+ + beta+ < p- - 1 < eta+ + gamma+.
inline MSelection select_M_concave(double lambda, double theta, const ExponentSet& e,
                                   double A_lambda, double Cbar) {
  const double ab = e.alpha_plus + e.beta_plus;
  const double eg = e.eta_plus + e.gamma_plus;
  const double pm1 = e.p_minus - 1.0;
  if (!(ab < pm1 && pm1 < eg))
    throw std::invalid_argument("select_M_concave: need alpha+ + beta+ < p- - 1 < eta+ + gamma+");
  if (!(lambda > 0.0 && theta > 0.0 && A_lambda > 0.0 && Cbar > 0.0))
    throw std::invalid_argument("select_M_concave: lambda, theta, A_lambda, Cbar must be > 0");
  MSelection sel;
  const double expo = pm1 / (eg - ab);
  sel.L = std::pow((pm1 - ab) / (eg - pm1), expo);
  sel.M = sel.L * std::pow(lambda / theta, expo);
  sel.psi_at_M = concave_psi(sel.M, lambda, theta, e, A_lambda, Cbar);
  sel.admissible = sel.psi_at_M <= 1.0;
  return sel;
}

//! Exact-slope cubic Hermite table for the antiderivative of the truncated
//! nonlinearity: F(t) = int_0^t f on [0, theta], constant outside. Knot
//! values come from cumulative Simpson, knot slopes are f itself, so the
//! interpolant and its derivative stay consistent to near machine precision.
class TruncatedAntiderivative {
 public:
  TruncatedAntiderivative(std::function<double(double)> f, double theta, int knots = 4096)
      : f_(std::move(f)), theta_(theta), n_(knots) {
    if (!(theta > 0.0)) throw std::invalid_argument("TruncatedAntiderivative: theta must be > 0");
    const double h = theta_ / n_;
    fv_.resize(n_ + 1);
    Fv_.resize(n_ + 1);
    for (int i = 0; i <= n_; ++i) fv_[i] = f_(i * h);
    Fv_[0] = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double mid = f_((i + 0.5) * h);
      Fv_[i + 1] = Fv_[i] + h / 6.0 * (fv_[i] + 4.0 * mid + fv_[i + 1]);
    }
  }

  double theta() const { return theta_; }

  double value(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= theta_) return Fv_[n_];
    const double h = theta_ / n_;
    const int c = std::min(int(t / h), n_ - 1);
    const double x = (t - c * h) / h;
    const double x2 = x * x, x3 = x2 * x;
    return Fv_[c] * (2 * x3 - 3 * x2 + 1) + h * fv_[c] * (x3 - 2 * x2 + x) +
           Fv_[c + 1] * (-2 * x3 + 3 * x2) + h * fv_[c + 1] * (x3 - x2);
  }

  //! Exact derivative of value(); approximates the truncated f itself.
  double slope(double t) const {
    if (t <= 0.0 || t >= theta_) return 0.0;
    const double h = theta_ / n_;
    const int c = std::min(int(t / h), n_ - 1);
    const double x = (t - c * h) / h;
    const double x2 = x * x;
    return Fv_[c] * (6 * x2 - 6 * x) / h + fv_[c] * (3 * x2 - 4 * x + 1) +
           Fv_[c + 1] * (-6 * x2 + 6 * x) / h + fv_[c + 1] * (3 * x2 - 2 * x);
  }

 private:
  std::function<double(double)> f_;
  double theta_;
  int n_;
  std::vector<double> fv_, Fv_;
};

struct LogisticSeed {
  ScalarField z0;
  double J_z0 = 0.0;
  bool ok = false;  // false when lambda_tilde is too small for a negative level
  double probe_gradient_energy = 0.0;
  double probe_forcing = 0.0;  // lambda_tilde * int F(probe)
  long iterations = 0;
};

namespace detail {

inline double logistic_energy(const ScalarField& u, const ScalarField& p, double lambda_tilde,
                              const TruncatedAntiderivative& F, double eps_reg) {
  double grad_part = 0.0;
  energy_kernel<true, false>(u, p, ScalarField(u.grid, 0.0), eps_reg, &grad_part, nullptr);
  long double E = grad_part;
  for (std::size_t i = 0; i < u.size(); ++i)
    E -= static_cast<long double>(lambda_tilde) * u.grid.weight(i) * F.value(u[i]);
  return static_cast<double>(E);
}

inline ScalarField logistic_gradient(const ScalarField& u, const ScalarField& p,
                                     double lambda_tilde, const TruncatedAntiderivative& F,
                                     double eps_reg) {
  ScalarField g(u.grid);
  energy_kernel<false, true>(u, p, ScalarField(u.grid, 0.0), eps_reg, nullptr, &g);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!u.grid.is_boundary(i)) g[i] -= lambda_tilde * u.grid.weight(i) * F.slope(u[i]);
  return g;
}

}  // namespace detail

//! Minimizes J(u) = int (1/p)|grad u|^p - lambda_tilde int F(u) over fields
//! vanishing on the boundary: projected Barzilai-Borwein descent with Armijo
//! backtracking. The nodewise clamp into [0, theta] never increases J (leg
//! differences shrink and F is constant outside the band), so iterates stay
//! in the band and the method remains a descent method. Returns a flagged
//! report instead of failing when lambda_tilde is too small to reach a
//! negative level.
inline LogisticSeed build_logistic_z0(const Grid& grid, const ScalarField& p,
                                      const std::function<double(double)>& f, double theta,
                                      double lambda_tilde, const SolverOptions& opts = {}) {
  if (!(theta > 0.0)) throw std::invalid_argument("build_logistic_z0: theta must be > 0");
  if (lambda_tilde < 0.0)
    throw std::invalid_argument("build_logistic_z0: lambda_tilde must be >= 0");
  const TruncatedAntiderivative F(f, theta);

  // ramp probe: theta at distance >= inradius/2, linear in the strip
  const ScalarField d = distance_field(grid);
  const double R = grid.inradius();
  ScalarField u(grid);
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    u[i] = grid.is_boundary(i) ? 0.0 : theta * std::min(1.0, 2.0 * d[i] / R);

  LogisticSeed seed;
  detail::energy_kernel<true, false>(u, p, ScalarField(grid, 0.0), opts.eps_reg,
                                     &seed.probe_gradient_energy, nullptr);
  seed.probe_forcing = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    seed.probe_forcing += lambda_tilde * grid.weight(i) * F.value(u[i]);
  double E = seed.probe_gradient_energy - seed.probe_forcing;
  if (!(E < 0.0)) {
    seed.z0 = ScalarField(grid, 0.0);
    seed.J_z0 = 0.0;
    seed.ok = false;  // probe level nonnegative: lambda_tilde too small
    return seed;
  }

  ScalarField grad = detail::logistic_gradient(u, p, lambda_tilde, F, opts.eps_reg);
  double gn = sup_norm_interior(grad);
  const std::size_t n = u.size();
  std::vector<double> u_prev(n, 0.0), g_prev(n, 0.0);
  bool have_prev = false;
  double step = 1.0;
  long iter = 0;
  while (iter < opts.max_iter && gn > opts.tol) {
    double gnorm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) gnorm2 += grad[i] * grad[i];
    if (gnorm2 == 0.0) break;
    double step_safe = 0.0;
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
    ScalarField trial(grid);
    double t = step, E_new = E;
    const double resolvable = 1e-16 * (std::abs(E) + 1.0);
    if (t * gnorm2 < resolvable && step_safe > 0.0) t = std::min(t, step_safe);
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t i = 0; i < n; ++i)
        trial[i] = std::clamp(u[i] - t * grad[i], 0.0, theta);
      E_new = detail::logistic_energy(trial, p, lambda_tilde, F, opts.eps_reg);
      if (std::isfinite(E_new) &&
          (E_new <= E - 1e-4 * t * gnorm2 || t * gnorm2 < resolvable))
        break;
      t *= 0.5;
    }
    u = trial;
    E = E_new;
    grad = detail::logistic_gradient(u, p, lambda_tilde, F, opts.eps_reg);
    gn = sup_norm_interior(grad);
    have_prev = true;
    ++iter;
  }

  seed.z0 = std::move(u);
  seed.J_z0 = E;
  seed.iterations = iter;
  seed.ok = E < 0.0 && gn <= opts.tol;
  return seed;
}

struct Lambda0Selection {
  double lambda0 = 0.0;
  double mu0 = 0.0;
  double A0 = 0.0;  // max of A over the bracket [|z0|_r, |theta|_r]
  double C = 0.0;   // nodewise floor of |z0|_{q(x)}^{alpha(x)}
};

//! Threshold lambda0 = lambda_tilde * mu0 with mu0 = A0 / C. For
//! lambda >= lambda0 the pair (z0, theta) satisfies the bracket
//! inequalities of the logistic problem.
inline Lambda0Selection select_lambda0_logistic(const ScalarField& z0,
                                                const NonlocalProblem& prob, double theta,
                                                double lambda_tilde) {
  const ExponentSet& e = prob.exponents;
  const double nq = luxemburg_norm(z0, e.q);
  Lambda0Selection sel;
  sel.C = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z0.size(); ++i)
    sel.C = std::min(sel.C, std::pow(nq, e.alpha[i]));
  if (!(sel.C > 0.0))
    throw std::invalid_argument("select_lambda0_logistic: z0 is degenerate (|z0|_q^alpha has no "
                                "positive floor)");
  const double nr_lo = luxemburg_norm(z0, e.r);
  const double nr_hi = luxemburg_norm(constant_field(prob.grid, theta), e.r);
  sel.A0 = sample_coeff_max(prob.A, prob.grid, nr_lo, nr_hi);
  if (!(sel.A0 > 0.0))
    throw std::invalid_argument("select_lambda0_logistic: A must be positive on the bracket");
  sel.mu0 = sel.A0 / sel.C;
  sel.lambda0 = lambda_tilde * sel.mu0;
  return sel;
}

}  // namespace varexp

#endif  // VAREXP_CONSTRUCTIONS_HPP
