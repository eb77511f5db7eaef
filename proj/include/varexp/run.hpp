#ifndef VAREXP_RUN_HPP
#define VAREXP_RUN_HPP

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "varexp/applications.hpp"
#include "varexp/config.hpp"

namespace varexp {

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_solution_csv(const std::filesystem::path& path, const ScalarField& u,
                               const ScalarField& sub, const ScalarField& sup) {
  const Grid& g = u.grid;
  const ScalarField d = distance_field(g);
  std::ofstream out(path, std::ios::binary);  // fixed newlines keep runs byte-identical
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (g.dim == 2 ? "x1,x2,u,sub,sup,distance\n" : "x1,u,sub,sup,distance\n");
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Point x = g.coord(i);
    out << fmt17(x[0]) << ",";
    if (g.dim == 2) out << fmt17(x[1]) << ",";
    out << fmt17(u[i]) << "," << fmt17(sub[i]) << "," << fmt17(sup[i]) << "," << fmt17(d[i])
        << "\n";
  }
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const std::vector<OuterIteration>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iter,fp_residual,inner_iters,K0\n";
  for (const auto& t : trace)
    out << t.iter << "," << fmt17(t.fp_residual) << "," << t.inner_iters << ","
        << fmt17(t.rhs_sup) << "\n";
}

using SummaryKV = std::vector<std::pair<std::string, std::string>>;

inline void write_summary(const std::filesystem::path& path, const SummaryKV& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
}

inline int env_thread_cap() {
  const char* env = std::getenv("VAREXP_THREADS");
  if (!env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  return v >= 1 ? static_cast<int>(v) : 1;
}

}  // namespace detail

//! Executes one configuration and writes the solution/trace CSVs plus the
//! run summary. Returns the process exit code: 0 converged and ordered,
//! 1 configuration error, 2 non-convergence or a blocked parameter search.
//! The caller maps ConfigError thrown by compile_config to exit 1.
inline int execute_run(const RunConfig& cfg, const std::string& out_dir, bool quiet,
                       std::ostream& log) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();

  const CompiledConfig cc = compile_config(cfg);
  if (!quiet && cc.h0.has_warnings()) log << cc.h0.describe();

  // The engine runs one configuration sequentially; the cap only bounds
  // what worker mode may use.
  const int thread_cap = detail::env_thread_cap();

  PipelineOptions opts;
  opts.a0 = cfg.a0;
  opts.K_knob = cfg.K_knob;
  opts.delta = cfg.delta;
  opts.k_cap = cfg.k_cap;
  opts.a_limit = cfg.a_limit;
  opts.a1_hint = cfg.a1;
  opts.tol_fp = cfg.tol_fp;
  opts.max_outer = cfg.max_outer;
  opts.probe_count = cfg.probe_count;
  opts.solver.eps_reg = cfg.eps_reg;
  opts.solver.tol = cfg.inner_tol > 0.0 ? cfg.inner_tol : cfg.tol_fp / 10.0;
  opts.solver.max_iter = cfg.max_inner;

  detail::SummaryKV kv;
  kv.emplace_back("app", to_string(cfg.app));
  kv.emplace_back("dim", std::to_string(cfg.dim));
  kv.emplace_back("n", std::to_string(cfg.n[0]) +
                           (cfg.dim == 2 ? " " + std::to_string(cfg.n[1]) : ""));
  kv.emplace_back("threads", std::to_string(thread_cap));
  if (cc.h0.has_warnings()) {
    std::string w = cc.h0.describe();
    for (auto& ch : w)
      if (ch == '\n') ch = ';';
    kv.emplace_back("h0_warnings", w);
  }

  int exit_code = 0;
  std::string failure;
  bool have_solution = false;
  ScalarField u, sub, sup;
  std::vector<OuterIteration> trace;

  try {
    switch (cfg.app) {
      case Application::Sublinear: {
        const auto which =
            cfg.sublinear_case == "A2" ? SublinearCase::A2 : SublinearCase::A1;
        SublinearRun run = run_sublinear(cc.grid, cc.exponents, cc.A, opts, which);
        kv.emplace_back("case", cfg.sublinear_case);
        kv.emplace_back("k", detail::fmt17(run.phi_params.k));
        kv.emplace_back("sigma", detail::fmt17(run.phi_params.sigma));
        kv.emplace_back("mu", detail::fmt17(run.phi_params.mu));
        kv.emplace_back("a", detail::fmt17(run.phi_params.a));
        kv.emplace_back("lambda", detail::fmt17(run.lambda));
        kv.emplace_back("K_used", detail::fmt17(run.K_used));
        kv.emplace_back("A_lambda", detail::fmt17(run.A_lambda));
        kv.emplace_back("lambda_denom", detail::fmt17(run.lambda_denom));
        kv.emplace_back("sub_violation", detail::fmt17(run.pair_report.sub_violation));
        kv.emplace_back("sup_violation", detail::fmt17(run.pair_report.sup_violation));
        kv.emplace_back("K0", detail::fmt17(run.solve.K0));
        u = run.solve.solution;
        sub = run.pair.sub;
        sup = run.pair.sup;
        trace = run.solve.trace;
        have_solution = true;
        if (!run.solve.converged || !run.solve.ordering_ok) exit_code = 2;
        kv.emplace_back("converged", run.solve.converged ? "true" : "false");
        kv.emplace_back("ordering_ok", run.solve.ordering_ok ? "true" : "false");
        kv.emplace_back("outer_iterations", std::to_string(run.solve.iterations));
        break;
      }
      case Application::ConcaveConvex: {
        ConcaveConvexRun run =
            run_concave_convex(cc.grid, cc.exponents, cc.A, cfg.lambda, cfg.theta, opts);
        kv.emplace_back("k", detail::fmt17(run.phi_params.k));
        kv.emplace_back("sigma", detail::fmt17(run.phi_params.sigma));
        kv.emplace_back("mu", detail::fmt17(run.phi_params.mu));
        kv.emplace_back("lambda", detail::fmt17(run.lambda));
        kv.emplace_back("theta", detail::fmt17(run.theta));
        kv.emplace_back("M", detail::fmt17(run.M));
        kv.emplace_back("psi_at_M", detail::fmt17(run.psi_at_M));
        kv.emplace_back("A_lambda", detail::fmt17(run.A_lambda));
        kv.emplace_back("Cbar", detail::fmt17(run.Cbar));
        kv.emplace_back("K_used", detail::fmt17(run.K_used));
        kv.emplace_back("sub_violation", detail::fmt17(run.pair_report.sub_violation));
        kv.emplace_back("sup_violation", detail::fmt17(run.pair_report.sup_violation));
        kv.emplace_back("K0", detail::fmt17(run.solve.K0));
        u = run.solve.solution;
        sub = run.pair.sub;
        sup = run.pair.sup;
        trace = run.solve.trace;
        have_solution = true;
        if (!run.solve.converged || !run.solve.ordering_ok) exit_code = 2;
        kv.emplace_back("converged", run.solve.converged ? "true" : "false");
        kv.emplace_back("ordering_ok", run.solve.ordering_ok ? "true" : "false");
        kv.emplace_back("outer_iterations", std::to_string(run.solve.iterations));
        break;
      }
      case Application::Logistic: {
        const auto f_t = [expr = cc.f_expr_t_only](double t) {
          expr::Env env;
          env.t = t;
          return expr(env);
        };
        LogisticRun run = run_logistic(cc.grid, cc.exponents, cc.A, f_t, cfg.theta_cap,
                                       cfg.lambda_tilde, cfg.lambda, opts);
        kv.emplace_back("lambda_tilde", detail::fmt17(cfg.lambda_tilde));
        kv.emplace_back("probe_gradient_energy",
                        detail::fmt17(run.seed.probe_gradient_energy));
        kv.emplace_back("probe_forcing", detail::fmt17(run.seed.probe_forcing));
        if (!run.seed_ok) {
          kv.emplace_back("seed_ok", "false");
          failure = "lambda_tilde too small: the probe level J(phi0) = " +
                    detail::fmt17(run.seed.probe_gradient_energy - run.seed.probe_forcing) +
                    " is not negative";
          exit_code = 1;
          break;
        }
        kv.emplace_back("seed_ok", "true");
        kv.emplace_back("J_z0", detail::fmt17(run.seed.J_z0));
        kv.emplace_back("lambda0", detail::fmt17(run.l0.lambda0));
        kv.emplace_back("mu0", detail::fmt17(run.l0.mu0));
        kv.emplace_back("A0", detail::fmt17(run.l0.A0));
        kv.emplace_back("C", detail::fmt17(run.l0.C));
        kv.emplace_back("lambda", detail::fmt17(run.lambda));
        kv.emplace_back("sub_violation", detail::fmt17(run.pair_report.sub_violation));
        kv.emplace_back("sup_violation", detail::fmt17(run.pair_report.sup_violation));
        kv.emplace_back("K0", detail::fmt17(run.solve.K0));
        u = run.solve.solution;
        sub = run.pair.sub;
        sup = run.pair.sup;
        trace = run.solve.trace;
        have_solution = true;
        if (!run.solve.converged || !run.solve.ordering_ok) exit_code = 2;
        kv.emplace_back("converged", run.solve.converged ? "true" : "false");
        kv.emplace_back("ordering_ok", run.solve.ordering_ok ? "true" : "false");
        kv.emplace_back("outer_iterations", std::to_string(run.solve.iterations));
        break;
      }
      case Application::Custom: {
        // multipliers live inside the user's f and g expressions; lambda is
        // the torsion level of the supplied supersolution
        CustomRun run = run_custom(cc.grid, cc.exponents, cc.A, cc.f, cc.g, 1.0, 1.0, cfg.k,
                                   cfg.lambda, opts);
        kv.emplace_back("k", detail::fmt17(run.phi_params.k));
        kv.emplace_back("sigma", detail::fmt17(run.phi_params.sigma));
        kv.emplace_back("mu", detail::fmt17(run.phi_params.mu));
        kv.emplace_back("lambda", detail::fmt17(run.lambda));
        kv.emplace_back("sub_violation", detail::fmt17(run.pair_report.sub_violation));
        kv.emplace_back("sup_violation", detail::fmt17(run.pair_report.sup_violation));
        kv.emplace_back("K0", detail::fmt17(run.solve.K0));
        u = run.solve.solution;
        sub = run.pair.sub;
        sup = run.pair.sup;
        trace = run.solve.trace;
        have_solution = true;
        if (!run.solve.converged || !run.solve.ordering_ok) exit_code = 2;
        kv.emplace_back("converged", run.solve.converged ? "true" : "false");
        kv.emplace_back("ordering_ok", run.solve.ordering_ok ? "true" : "false");
        kv.emplace_back("outer_iterations", std::to_string(run.solve.iterations));
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;  // caller reports and exits 1
  } catch (const std::invalid_argument& e) {
    exit_code = 1;  // violated problem hypotheses are configuration errors
    failure = e.what();
  } catch (const std::exception& e) {
    exit_code = 2;  // blocked searches and stalled solves
    failure = e.what();
  }

  if (have_solution) {
    kv.emplace_back("sup_u", detail::fmt17(max_value(u)));
    kv.emplace_back("norm_q", detail::fmt17(luxemburg_norm(u, cc.exponents.q)));
    kv.emplace_back("norm_r", detail::fmt17(luxemburg_norm(u, cc.exponents.r)));
    kv.emplace_back("norm_s", detail::fmt17(luxemburg_norm(u, cc.exponents.s)));
  }

  fs::path dir(out_dir.empty() ? "." : out_dir);
  fs::create_directories(dir);
  bool partial = !have_solution;
  if (have_solution) {
    detail::write_solution_csv(dir / cfg.solution_file, u, sub, sup);
    detail::write_trace_csv(dir / cfg.trace_file, trace);
  }
  kv.emplace_back("partial_artifacts", partial ? "true" : "false");
  if (!failure.empty()) kv.emplace_back("failure", failure);
  kv.emplace_back("exit_code", std::to_string(exit_code));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  kv.emplace_back("wall_time_s", detail::fmt17(wall));
  detail::write_summary(dir / cfg.summary_file, kv);

  if (!quiet) {
    for (const auto& [k, v] : kv) log << k << " = " << v << "\n";
  } else if (!failure.empty()) {
    log << failure << "\n";
  }
  return exit_code;
}

}  // namespace varexp

#endif  // VAREXP_RUN_HPP
