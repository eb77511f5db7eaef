#ifndef VAREXP_MODULAR_HPP
#define VAREXP_MODULAR_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "varexp/grid.hpp"

namespace varexp {

//! The exponent data of a variable-exponent problem: the eight measurable
//! functions sampled on a common grid plus their discrete inf/sup. The
//! discrete bounds stand in for the essential inf/sup of the continuum
//! setting.
struct ExponentSet {
  ScalarField p, r, q, s, alpha, beta, gamma, eta;
  double p_minus = 0, p_plus = 0;
  double r_minus = 0, r_plus = 0;
  double q_minus = 0, q_plus = 0;
  double s_minus = 0, s_plus = 0;
  double alpha_minus = 0, alpha_plus = 0;
  double beta_minus = 0, beta_plus = 0;
  double gamma_minus = 0, gamma_plus = 0;
  double eta_minus = 0, eta_plus = 0;

  static ExponentSet create(ScalarField p, ScalarField r, ScalarField q, ScalarField s,
                            ScalarField alpha, ScalarField beta, ScalarField gamma,
                            ScalarField eta) {
    require_same_grid(p, r, "ExponentSet");
    require_same_grid(p, q, "ExponentSet");
    require_same_grid(p, s, "ExponentSet");
    require_same_grid(p, alpha, "ExponentSet");
    require_same_grid(p, beta, "ExponentSet");
    require_same_grid(p, gamma, "ExponentSet");
    require_same_grid(p, eta, "ExponentSet");
    ExponentSet e{std::move(p), std::move(r), std::move(q), std::move(s),
                  std::move(alpha), std::move(beta), std::move(gamma), std::move(eta)};
    e.p_minus = min_value(e.p);
    e.p_plus = max_value(e.p);
    e.r_minus = min_value(e.r);
    e.r_plus = max_value(e.r);
    e.q_minus = min_value(e.q);
    e.q_plus = max_value(e.q);
    e.s_minus = min_value(e.s);
    e.s_plus = max_value(e.s);
    e.alpha_minus = min_value(e.alpha);
    e.alpha_plus = max_value(e.alpha);
    e.beta_minus = min_value(e.beta);
    e.beta_plus = max_value(e.beta);
    e.gamma_minus = min_value(e.gamma);
    e.gamma_plus = max_value(e.gamma);
    e.eta_minus = min_value(e.eta);
    e.eta_plus = max_value(e.eta);
    return e;
  }

  //! Convenience builder for problems that only vary p; the remaining
  //! exponents default to q=r=s=2 and alpha=beta=gamma=eta=0.
  static ExponentSet defaults(const ScalarField& p) {
    const Grid& g = p.grid;
    return create(p, constant_field(g, 2.0), constant_field(g, 2.0), constant_field(g, 2.0),
                  constant_field(g, 0.0), constant_field(g, 0.0), constant_field(g, 0.0),
                  constant_field(g, 0.0));
  }
};

inline void require_exponent_at_least_one(const ScalarField& m, const char* what) {
  const double mn = min_value(m);
  if (!(mn >= 1.0))
    throw std::invalid_argument(std::string(what) + ": exponent field has min " +
                                std::to_string(mn) + " < 1");
}

//! Modular rho(u) = integral of |u(x)|^{m(x)} over the domain.
inline double modular(const ScalarField& u, const ScalarField& m) {
  require_same_grid(u, m, "modular");
  require_exponent_at_least_one(m, "modular");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += u.grid.weight(i) * std::pow(std::abs(u[i]), m[i]);
  return s;
}

namespace detail {
inline double modular_scaled(const ScalarField& u, const ScalarField& m, double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += u.grid.weight(i) * std::pow(std::abs(u[i]) / lambda, m[i]);
  return s;
}
}  // namespace detail

//! Luxemburg norm: the unique lambda > 0 with modular(u/lambda) = 1 (0 for
//! the zero field). The scaled modular is continuous and strictly decreasing
//! in lambda, so a doubling/halving bracket followed by bisection to relative
//! width 1e-12 pins the root.
inline double luxemburg_norm(const ScalarField& u, const ScalarField& m) {
  require_same_grid(u, m, "luxemburg_norm");
  require_exponent_at_least_one(m, "luxemburg_norm");
  if (sup_norm(u) == 0.0) return 0.0;

  double hi = 1.0, lo = 1.0;
  if (detail::modular_scaled(u, m, 1.0) > 1.0) {
    while (detail::modular_scaled(u, m, hi) > 1.0) {
      hi *= 2.0;
      if (hi > 1e300) throw std::runtime_error("luxemburg_norm: bracket overflow");
    }
    lo = 0.5 * hi;
  } else {
    while (detail::modular_scaled(u, m, lo) < 1.0) {
      lo *= 0.5;
      if (lo < 1e-300) throw std::runtime_error("luxemburg_norm: bracket underflow");
    }
    hi = 2.0 * lo;
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::modular_scaled(u, m, mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

//! One validated clause of the exponent hypothesis.
struct H0Clause {
  std::string clause;
  std::string message;
  bool hard = true;
};

struct H0Report {
  std::vector<H0Clause> violations;

  bool pass() const {
    for (const auto& v : violations)
      if (v.hard) return false;
    return true;
  }
  bool has_warnings() const {
    for (const auto& v : violations)
      if (!v.hard) return true;
    return false;
  }
  std::string describe() const {
    std::string s;
    for (const auto& v : violations) {
      s += (v.hard ? "violated " : "warning ");
      s += v.clause + ": " + v.message + "\n";
    }
    return s;
  }
};

//! Validates the exponent hypothesis (H0): inf p > 1, r/q/s >= 1, alpha and
//! gamma nonnegative. sup p < N is demoted to a warning: the discrete solver
//! is well-posed without the embedding it guarantees, and desk-scale 1-d/2-d
//! runs with p >= 2 would otherwise be impossible. Negative beta/eta only
//! matter to the sublinear and concave-convex constructions and warn here.
inline H0Report check_H0(const ExponentSet& e, int N) {
  H0Report rep;
  const auto num = [](double v) { return std::to_string(v); };
  if (!(e.p_minus > 1.0))
    rep.violations.push_back(
        {"(H0) inf p > 1", "inf p = " + num(e.p_minus) + " must exceed 1", true});
  if (e.r_minus < 1.0)
    rep.violations.push_back({"(H0) r in Linf_+", "inf r = " + num(e.r_minus) + " < 1", true});
  if (e.q_minus < 1.0)
    rep.violations.push_back({"(H0) q in Linf_+", "inf q = " + num(e.q_minus) + " < 1", true});
  if (e.s_minus < 1.0)
    rep.violations.push_back({"(H0) s in Linf_+", "inf s = " + num(e.s_minus) + " < 1", true});
  if (e.alpha_minus < 0.0)
    rep.violations.push_back(
        {"(H0) alpha >= 0", "inf alpha = " + num(e.alpha_minus) + " < 0", true});
  if (e.gamma_minus < 0.0)
    rep.violations.push_back(
        {"(H0) gamma >= 0", "inf gamma = " + num(e.gamma_minus) + " < 0", true});
  if (e.beta_minus < 0.0)
    rep.violations.push_back(
        {"beta >= 0", "inf beta = " + num(e.beta_minus) + " < 0 (needed by the sublinear and "
                      "concave-convex constructions)", false});
  if (e.eta_minus < 0.0)
    rep.violations.push_back(
        {"eta >= 0", "inf eta = " + num(e.eta_minus) + " < 0 (needed by the concave-convex "
                     "construction)", false});
  if (!(e.p_plus < static_cast<double>(N)))
    rep.violations.push_back({"(H0) sup p < N",
                              "sup p = " + num(e.p_plus) + " >= N = " + std::to_string(N),
                              false});
  return rep;
}

//! Slack of the variable-exponent Hoelder inequality,
//!   (1/m^- + 1/mc^-) |u|_{m(x)} |v|_{mc(x)} - |integral of u v|.
//! Negative return values flag a violation; m and mc must be pointwise
//! conjugate (1/m + 1/mc = 1) with inf m > 1.
inline double holder_gap(const ScalarField& u, const ScalarField& v, const ScalarField& m,
                         const ScalarField& m_conj) {
  require_same_grid(u, v, "holder_gap");
  require_same_grid(u, m, "holder_gap");
  require_same_grid(u, m_conj, "holder_gap");
  if (!(min_value(m) > 1.0))
    throw std::invalid_argument("holder_gap: need inf m > 1 for a conjugate pair");
  for (std::size_t i = 0; i < m.size(); ++i)
    if (std::abs(1.0 / m[i] + 1.0 / m_conj[i] - 1.0) > 1e-10)
      throw std::invalid_argument("holder_gap: exponents not conjugate at node " +
                                  std::to_string(i));
  double lhs = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) lhs += u.grid.weight(i) * u[i] * v[i];
  const double rhs = (1.0 / min_value(m) + 1.0 / min_value(m_conj)) * luxemburg_norm(u, m) *
                     luxemburg_norm(v, m_conj);
  return rhs - std::abs(lhs);
}

}  // namespace varexp

#endif  // VAREXP_MODULAR_HPP
