#ifndef VAREXP_CONFIG_HPP
#define VAREXP_CONFIG_HPP

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "varexp/expr.hpp"
#include "varexp/grid.hpp"
#include "varexp/modular.hpp"
#include "varexp/plaplace.hpp"
#include "varexp/subsuper.hpp"

namespace varexp {

//! Anything wrong with a run configuration; the CLI maps this to exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Application { Sublinear, ConcaveConvex, Logistic, Custom };

inline std::string to_string(Application a) {
  switch (a) {
    case Application::Sublinear: return "sublinear";
    case Application::ConcaveConvex: return "concave-convex";
    case Application::Logistic: return "logistic";
    case Application::Custom: return "custom";
  }
  return "?";
}

//! One run: domain, exponent and coefficient expressions, application
//! selector, scalar knobs and output names. Section/key layout:
//!
//!   [domain]        dim, x, y, n
//!   [exponents]     p, q, r, s, alpha, beta, gamma, eta   (x1/x2 expressions)
//!   [coefficients]  A, f, g                               (x1/x2/t expressions)
//!   [run]           app, lambda, theta, a0, a_limit, a1, k, K_knob,
//!                   lambda_tilde, theta_cap, tol_fp, max_outer, inner_tol,
//!                   max_inner, eps_reg, probe_count, delta, k_cap, case
//!   [output]        solution, trace, summary
struct RunConfig {
  // domain
  int dim = 1;
  std::array<std::array<double, 2>, 2> extents{{{0.0, 1.0}, {0.0, 1.0}}};
  std::array<std::size_t, 2> n{129, 129};

  // expressions (empty string means the default noted in parse_config)
  std::string p_expr, q_expr = "2", r_expr = "2", s_expr = "2";
  std::string alpha_expr = "0", beta_expr = "0", gamma_expr = "0", eta_expr = "0";
  std::string A_expr = "1", f_expr = "0", g_expr = "0";

  Application app = Application::Sublinear;
  std::string sublinear_case = "A1";

  double lambda = 1.0;
  double theta = 1.0;
  double a0 = 1.0;
  double a_limit = 0.0;
  double a1 = 0.0;
  double k = 0.0;  // custom app only
  double K_knob = 2.0;
  double lambda_tilde = 0.0;
  double theta_cap = 1.0;
  double tol_fp = 1e-6;
  long max_outer = 200;
  double inner_tol = 0.0;  // 0 = tol_fp / 10
  long max_inner = 50000;
  double eps_reg = 1e-8;
  int probe_count = 3;
  double delta = 0.0;
  double k_cap = 65536.0;

  std::string solution_file = "solution.csv";
  std::string trace_file = "trace.csv";
  std::string summary_file = "summary.txt";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (...) {
  }
  throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
}

inline long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (...) {
  }
  throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
}

inline std::vector<double> parse_doubles(const std::string& key, const std::string& v,
                                         std::size_t count) {
  std::istringstream in(v);
  std::vector<double> out;
  double x;
  while (in >> x) out.push_back(x);
  if (!in.eof() || out.size() != count)
    throw ConfigError("config: key '" + key + "' expects " + std::to_string(count) +
                      " numbers, got '" + v + "'");
  return out;
}

}  // namespace detail

//! Parses the sectioned key = value text. Unknown sections or keys are
//! errors (they are almost always typos); '#' and ';' start comments.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::string n_value;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = " (line " + std::to_string(lineno) + ")";

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config: malformed section header" + where);
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "domain" && section != "exponents" && section != "coefficients" &&
          section != "run" && section != "output")
        throw ConfigError("config: unknown section [" + section + "]" + where);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: expected key = value" + where);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: empty key or value" + where);
    const std::string qual = section + "." + key;
    if (!seen.emplace(qual, value).second)
      throw ConfigError("config: duplicate key '" + qual + "'" + where);

    if (section == "domain") {
      if (key == "dim") {
        const long d = detail::parse_long(qual, value);
        if (d != 1 && d != 2) throw ConfigError("config: dim must be 1 or 2" + where);
        cfg.dim = static_cast<int>(d);
      } else if (key == "x") {
        const auto v = detail::parse_doubles(qual, value, 2);
        cfg.extents[0] = {v[0], v[1]};
      } else if (key == "y") {
        const auto v = detail::parse_doubles(qual, value, 2);
        cfg.extents[1] = {v[0], v[1]};
      } else if (key == "n") {
        n_value = value;
      } else {
        throw ConfigError("config: unknown key '" + qual + "'" + where);
      }
    } else if (section == "exponents") {
      if (key == "p") cfg.p_expr = value;
      else if (key == "q") cfg.q_expr = value;
      else if (key == "r") cfg.r_expr = value;
      else if (key == "s") cfg.s_expr = value;
      else if (key == "alpha") cfg.alpha_expr = value;
      else if (key == "beta") cfg.beta_expr = value;
      else if (key == "gamma") cfg.gamma_expr = value;
      else if (key == "eta") cfg.eta_expr = value;
      else throw ConfigError("config: unknown key '" + qual + "'" + where);
    } else if (section == "coefficients") {
      if (key == "A") cfg.A_expr = value;
      else if (key == "f") cfg.f_expr = value;
      else if (key == "g") cfg.g_expr = value;
      else throw ConfigError("config: unknown key '" + qual + "'" + where);
    } else if (section == "run") {
      if (key == "app") {
        if (value == "sublinear") cfg.app = Application::Sublinear;
        else if (value == "concave-convex") cfg.app = Application::ConcaveConvex;
        else if (value == "logistic") cfg.app = Application::Logistic;
        else if (value == "custom") cfg.app = Application::Custom;
        else throw ConfigError("config: unknown app '" + value + "'" + where);
      } else if (key == "case") {
        if (value != "A1" && value != "A2")
          throw ConfigError("config: case must be A1 or A2" + where);
        cfg.sublinear_case = value;
      } else if (key == "lambda") cfg.lambda = detail::parse_double(qual, value);
      else if (key == "theta") cfg.theta = detail::parse_double(qual, value);
      else if (key == "a0") cfg.a0 = detail::parse_double(qual, value);
      else if (key == "a_limit") cfg.a_limit = detail::parse_double(qual, value);
      else if (key == "a1") cfg.a1 = detail::parse_double(qual, value);
      else if (key == "k") cfg.k = detail::parse_double(qual, value);
      else if (key == "K_knob") cfg.K_knob = detail::parse_double(qual, value);
      else if (key == "lambda_tilde") cfg.lambda_tilde = detail::parse_double(qual, value);
      else if (key == "theta_cap") cfg.theta_cap = detail::parse_double(qual, value);
      else if (key == "tol_fp") cfg.tol_fp = detail::parse_double(qual, value);
      else if (key == "max_outer") cfg.max_outer = detail::parse_long(qual, value);
      else if (key == "inner_tol") cfg.inner_tol = detail::parse_double(qual, value);
      else if (key == "max_inner") cfg.max_inner = detail::parse_long(qual, value);
      else if (key == "eps_reg") cfg.eps_reg = detail::parse_double(qual, value);
      else if (key == "probe_count")
        cfg.probe_count = static_cast<int>(detail::parse_long(qual, value));
      else if (key == "delta") cfg.delta = detail::parse_double(qual, value);
      else if (key == "k_cap") cfg.k_cap = detail::parse_double(qual, value);
      else throw ConfigError("config: unknown key '" + qual + "'" + where);
    } else if (section == "output") {
      if (key == "solution") cfg.solution_file = value;
      else if (key == "trace") cfg.trace_file = value;
      else if (key == "summary") cfg.summary_file = value;
      else throw ConfigError("config: unknown key '" + qual + "'" + where);
    } else {
      throw ConfigError("config: key '" + key + "' outside any section" + where);
    }
  }

  if (!n_value.empty()) {
    std::istringstream ns(n_value);
    std::vector<long> counts;
    long v;
    while (ns >> v) counts.push_back(v);
    if (counts.empty() || counts.size() > 2 || !ns.eof())
      throw ConfigError("config: domain.n expects one or two node counts");
    cfg.n[0] = static_cast<std::size_t>(counts[0]);
    cfg.n[1] = counts.size() == 2 ? static_cast<std::size_t>(counts[1]) : cfg.n[0];
  }
  if (cfg.p_expr.empty()) throw ConfigError("config: exponents.p is required");
  return cfg;
}

//! Everything a pipeline needs, compiled and validated from a RunConfig.
struct CompiledConfig {
  Grid grid;
  ExponentSet exponents;
  CoefficientFn A, f, g;
  expr::Expr f_expr_t_only;  // logistic nonlinearity, t as the only variable
  bool f_is_t_only = false;
  H0Report h0;
};

namespace detail {

inline ScalarField sample_expr(const expr::Expr& e, const Grid& g, const std::string& name) {
  ScalarField f(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Point x = g.coord(i);
    expr::Env env;
    env.x1 = x[0];
    env.x2 = x[1];
    try {
      f[i] = e(env);
    } catch (const expr::EvalError& err) {
      throw ConfigError("config: evaluating '" + name + "' failed at node " +
                        std::to_string(i) + ": " + err.what());
    }
  }
  require_finite(f, name.c_str());
  return f;
}

inline CoefficientFn wrap_xt_expr(const expr::Expr& e, const std::string& name) {
  return [e, name](const Point& x, double t) {
    expr::Env env;
    env.x1 = x[0];
    env.x2 = x[1];
    env.t = t;
    try {
      return e(env);
    } catch (const expr::EvalError& err) {
      throw std::runtime_error("evaluating '" + name + "' at t = " + std::to_string(t) + ": " +
                               err.what());
    }
  };
}

}  // namespace detail

//! Parses every expression in its proper variable scope, samples the
//! exponents, and validates the exponent hypothesis. Hard (H0) violations
//! throw ConfigError; warnings are returned for the caller to surface.
inline CompiledConfig compile_config(const RunConfig& cfg) {
  CompiledConfig cc;
  cc.grid = make_grid(cfg.dim, cfg.extents, cfg.n);

  std::vector<std::string> xvars = {"x1"};
  if (cfg.dim == 2) xvars.push_back("x2");
  std::vector<std::string> xtvars = xvars;
  xtvars.push_back("t");

  const auto parse_slot = [](const std::string& src, const std::vector<std::string>& vars,
                             const std::string& name) {
    try {
      return expr::Expr::parse(src, vars);
    } catch (const expr::ParseError& err) {
      throw ConfigError("config: '" + name + "' = \"" + src + "\": " + err.what());
    }
  };

  const auto p = detail::sample_expr(parse_slot(cfg.p_expr, xvars, "p"), cc.grid, "p");
  const auto q = detail::sample_expr(parse_slot(cfg.q_expr, xvars, "q"), cc.grid, "q");
  const auto r = detail::sample_expr(parse_slot(cfg.r_expr, xvars, "r"), cc.grid, "r");
  const auto s = detail::sample_expr(parse_slot(cfg.s_expr, xvars, "s"), cc.grid, "s");
  const auto alpha =
      detail::sample_expr(parse_slot(cfg.alpha_expr, xvars, "alpha"), cc.grid, "alpha");
  const auto beta =
      detail::sample_expr(parse_slot(cfg.beta_expr, xvars, "beta"), cc.grid, "beta");
  const auto gamma =
      detail::sample_expr(parse_slot(cfg.gamma_expr, xvars, "gamma"), cc.grid, "gamma");
  const auto eta = detail::sample_expr(parse_slot(cfg.eta_expr, xvars, "eta"), cc.grid, "eta");
  cc.exponents = ExponentSet::create(p, r, q, s, alpha, beta, gamma, eta);

  cc.h0 = check_H0(cc.exponents, cfg.dim);
  if (!cc.h0.pass())
    throw ConfigError("config: exponent hypothesis (H0) violated:\n" + cc.h0.describe());

  cc.A = detail::wrap_xt_expr(parse_slot(cfg.A_expr, xtvars, "A"), "A");
  cc.g = detail::wrap_xt_expr(parse_slot(cfg.g_expr, xtvars, "g"), "g");
  const expr::Expr f_xt = parse_slot(cfg.f_expr, xtvars, "f");
  cc.f = detail::wrap_xt_expr(f_xt, "f");
  try {
    cc.f_expr_t_only = expr::Expr::parse(cfg.f_expr, {"t"});
    cc.f_is_t_only = true;
  } catch (const expr::ParseError&) {
    cc.f_is_t_only = false;  // fine unless the logistic app needs f(t)
  }

  if (cfg.app == Application::Logistic) {
    if (!cc.f_is_t_only)
      throw ConfigError("config: the logistic app needs f as a function of t alone");
    if (!(cfg.lambda_tilde > 0.0))
      throw ConfigError("config: the logistic app needs lambda_tilde > 0");
    if (!(cfg.theta_cap > 0.0))
      throw ConfigError("config: the logistic app needs theta_cap > 0");
  }
  if (cfg.app == Application::Custom && !(cfg.k > 0.0))
    throw ConfigError("config: the custom app needs an explicit k > 0");
  if (!(cfg.tol_fp > 0.0)) throw ConfigError("config: tol_fp must be > 0");
  if (cfg.max_outer < 1) throw ConfigError("config: max_outer must be >= 1");
  return cc;
}

}  // namespace varexp

#endif  // VAREXP_CONFIG_HPP
