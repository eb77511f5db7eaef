#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_util.hpp"
#include "varexp/subsuper.hpp"

using namespace varexp;

namespace {

NonlocalProblem simple_problem(const Grid& g, CoefficientFn A, CoefficientFn f,
                               CoefficientFn gfn) {
  ExponentSet e = ExponentSet::defaults(constant_field(g, 2.0));
  return NonlocalProblem{g, std::move(e), std::move(A), std::move(f), std::move(gfn), 1.0, 1.0,
                         SolverOptions{}};
}

CoefficientFn constant_coeff(double c) {
  return [c](const Point&, double) { return c; };
}

SubSuperPair torsion_pair(const Grid& g, const ScalarField& p, double level) {
  SolverOptions tight;
  tight.tol = 1e-10;
  tight.max_iter = 300000;
  ScalarField sup = torsion(level, p, g, tight);
  ScalarField sub(g, 0.0);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (!g.is_boundary(i)) sub[i] = 1e-6 * sup[i];
  return SubSuperPair::make(std::move(sub), std::move(sup));
}

}  // namespace

TEST_CASE("pair construction and truncation") {
  const Grid g = make_interval(0, 1, 33);
  const ScalarField p2 = constant_field(g, 2.0);
  const SubSuperPair pair = torsion_pair(g, p2, 8.0);
  CHECK(pair.sub_positive_interior());

  SECTION("clamping") {
    testutil::Rng rng(2);
    ScalarField inside(g);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      inside[i] = pair.sub[i] + rng.u01() * (pair.sup[i] - pair.sub[i]);
    const ScalarField t = truncate(inside, pair);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(t[i] == inside[i]);

    const ScalarField low = truncate(constant_field(g, -10.0), pair);
    const ScalarField high = truncate(constant_field(g, 10.0), pair);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      CHECK(low[i] == pair.sub[i]);
      CHECK(high[i] == pair.sup[i]);
    }
  }

  SECTION("idempotence") {
    testutil::Rng rng(4);
    const ScalarField v = testutil::random_field(g, rng, -3, 3);
    const ScalarField t1 = truncate(v, pair);
    const ScalarField t2 = truncate(t1, pair);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(t1[i] == t2[i]);
  }

  SECTION("invalid pairs are rejected") {
    CHECK_THROWS_AS(SubSuperPair::make(constant_field(g, 1.0), constant_field(g, 2.0)),
                    std::invalid_argument);  // sub nonzero on the boundary
    ScalarField sub(g, 0.0), sup(g, 0.0);
    sub[5] = 1.0;  // interior node, above sup
    CHECK_THROWS_AS(SubSuperPair::make(sub, sup), std::invalid_argument);
  }
}

TEST_CASE("nonlocal right-hand side") {
  const Grid g = make_interval(0, 1, 65);

  SECTION("vanishing nonlinearities") {
    const auto prob = simple_problem(g, constant_coeff(1.0), constant_coeff(0.0),
                                     constant_coeff(0.0));
    const ScalarField h = nonlocal_rhs(constant_field(g, 1.0), prob);
    CHECK(sup_norm(h) == 0.0);
  }

  SECTION("norm powers of zero exponent collapse to one") {
    const auto prob = simple_problem(g, constant_coeff(1.0), constant_coeff(1.0),
                                     constant_coeff(0.0));
    const ScalarField h = nonlocal_rhs(constant_field(g, 1.0), prob);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(h[i] == Catch::Approx(1.0));
  }

  SECTION("hand-evaluated instance") {
    // f(x,t) = sqrt(t), q = 2, alpha = 1, g = 0, A = 2, v = 1 on (0,1):
    // H = sqrt(1) * |1|_{L^2} / 2 = 0.5
    ExponentSet e = ExponentSet::create(
        constant_field(g, 2.0), constant_field(g, 2.0), constant_field(g, 2.0),
        constant_field(g, 2.0), constant_field(g, 1.0), constant_field(g, 0.0),
        constant_field(g, 0.0), constant_field(g, 0.0));
    NonlocalProblem prob{g, e, constant_coeff(2.0),
                         [](const Point&, double t) { return std::sqrt(std::max(t, 0.0)); },
                         constant_coeff(0.0), 1.0, 1.0, SolverOptions{}};
    const ScalarField h = nonlocal_rhs(constant_field(g, 1.0), prob);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      CHECK(h[i] == Catch::Approx(0.5).epsilon(1e-9));
  }

  SECTION("nonpositive A is a hard error naming the hypothesis") {
    const auto prob = simple_problem(g, [](const Point&, double t) { return t - 0.5; },
                                     constant_coeff(1.0), constant_coeff(0.0));
    CHECK_THROWS_WITH(nonlocal_rhs(constant_field(g, 0.0), prob),
                      Catch::Matchers::ContainsSubstring("A must be positive"));
  }
}

TEST_CASE("a priori forcing bound") {
  const Grid g = make_interval(0, 1, 65);
  const ScalarField p2 = constant_field(g, 2.0);
  const SubSuperPair pair = torsion_pair(g, p2, 8.0);
  ExponentSet e = ExponentSet::create(
      p2, constant_field(g, 2.0), constant_field(g, 2.0), constant_field(g, 2.0),
      constant_field(g, 0.4), constant_field(g, 0.0), constant_field(g, 0.3),
      constant_field(g, 0.0));
  NonlocalProblem prob{g,
                       e,
                       [](const Point&, double t) { return 1.0 + t; },
                       [](const Point& x, double t) { return (1 + x[0]) * std::max(t, 0.0); },
                       [](const Point&, double t) { return std::max(t, 0.0) * std::max(t, 0.0); },
                       1.0,
                       0.5,
                       SolverOptions{}};
  const double k0 = rhs_bound(pair, prob);
  CHECK(k0 > 0.0);
  CHECK(std::isfinite(k0));

  testutil::Rng rng(8);
  for (int inst = 0; inst < 100; ++inst) {
    const double scale = std::pow(10.0, rng.uniform(-1, 1));
    ScalarField v(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) v[i] = scale * rng.uniform(-2, 2);
    const ScalarField h = nonlocal_rhs(truncate(v, pair), prob);
    CHECK(sup_norm(h) <= k0 * (1 + 1e-12));
  }
}

TEST_CASE("solution operator S") {
  const Grid g = make_interval(0, 1, 129);
  const ScalarField p2 = constant_field(g, 2.0);
  const SubSuperPair pair = torsion_pair(g, p2, 8.0);
  SolverOptions opts;
  opts.tol = 1e-9;
  opts.max_iter = 300000;

  SECTION("zero H maps everything to zero") {
    const auto prob = simple_problem(g, constant_coeff(1.0), constant_coeff(0.0),
                                     constant_coeff(0.0));
    const SResult s = solve_S(constant_field(g, 0.5), prob, pair, opts);
    CHECK(sup_norm(s.u) < 1e-8);
    CHECK(s.rhs_sup == 0.0);
  }

  SECTION("constant H solves the Poisson profile") {
    const double c = 3.0;
    const auto prob = simple_problem(g, constant_coeff(1.0), constant_coeff(c),
                                     constant_coeff(0.0));
    const SResult s = solve_S(pair.sub, prob, pair, opts);
    double err = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const double x = g.coord(i)[0];
      err = std::max(err, std::abs(s.u[i] - c * x * (1 - x) / 2));
    }
    CHECK(err < 1e-6);
    CHECK(s.rhs_sup == Catch::Approx(c));
  }

  SECTION("S factors through the truncation") {
    const auto prob = simple_problem(
        g, constant_coeff(1.0),
        [](const Point&, double t) { return std::max(t, 0.0); }, constant_coeff(0.0));
    const ScalarField outside = constant_field(g, 50.0);
    const SResult a = solve_S(outside, prob, pair, opts);
    const SResult b = solve_S(truncate(outside, pair), prob, pair, opts);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(a.u[i] == b.u[i]);
  }
}

TEST_CASE("picard fixed point") {
  const Grid g = make_interval(0, 1, 129);
  const ScalarField p2 = constant_field(g, 2.0);
  const SubSuperPair pair = torsion_pair(g, p2, 8.0);

  SECTION("zero H converges to zero") {
    const auto prob = simple_problem(g, constant_coeff(1.0), constant_coeff(0.0),
                                     constant_coeff(0.0));
    const SolveReport rep = fixed_point(prob, pair, 1e-6, 50);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 3);
    CHECK(sup_norm(rep.solution) < 1e-6);
  }

  SECTION("constant H converges immediately to the Poisson profile") {
    const auto prob = simple_problem(g, constant_coeff(1.0), constant_coeff(2.0),
                                     constant_coeff(0.0));
    const SolveReport rep = fixed_point(prob, pair, 1e-6, 50);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 3);
    double err = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const double x = g.coord(i)[0];
      err = std::max(err, std::abs(rep.solution[i] - x * (1 - x)));
    }
    CHECK(err < 1e-6);
    CHECK(rep.ordering_ok);
  }

  SECTION("the accepted iterate is a fixed point of S to tolerance") {
    const auto prob = simple_problem(
        g, [](const Point&, double t) { return 1.0 + 0.5 * t; },
        [](const Point&, double t) { return 1.0 + std::sqrt(std::max(t, 0.0)); },
        constant_coeff(0.0));
    const double tol_fp = 1e-7;
    const SolveReport rep = fixed_point(prob, pair, tol_fp, 100);
    REQUIRE(rep.converged);
    SolverOptions inner = prob.solver;
    inner.tol = tol_fp / 10.0;
    const SResult again = solve_S(rep.solution, prob, pair, inner);
    double res = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
      res = std::max(res, std::abs(again.u[i] - rep.solution[i]));
    CHECK(res <= tol_fp);
    CHECK(rep.ordering_ok);

    SECTION("iterates respect the a priori forcing bound") {
      for (const auto& it : rep.trace) CHECK(it.rhs_sup <= rep.K0 * (1 + 1e-12));
    }
  }

  SECTION("max_outer exhaustion reports rather than throws") {
    const auto prob = simple_problem(
        g, constant_coeff(1.0),
        [](const Point&, double t) { return 1.0 + std::max(t, 0.0); }, constant_coeff(0.0));
    const SolveReport rep = fixed_point(prob, pair, 1e-12, 1);
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(rep.trace.size() == 1);
  }

  SECTION("2d constant-H run stays sandwiched") {
    const Grid g2 = make_rectangle(0, 1, 0, 1, 17, 17);
    const ScalarField p = constant_field(g2, 2.0);
    SolverOptions tight;
    tight.tol = 1e-10;
    tight.max_iter = 300000;
    ScalarField sup = torsion(4.0, p, g2, tight);
    ScalarField sub(g2, 0.0);
    for (std::size_t i = 0; i < g2.node_count(); ++i)
      if (!g2.is_boundary(i)) sub[i] = 1e-6 * sup[i];
    const SubSuperPair pair2 = SubSuperPair::make(sub, sup);
    ExponentSet e2 = ExponentSet::defaults(p);
    NonlocalProblem prob{g2, e2, constant_coeff(1.0), constant_coeff(1.0),
                         constant_coeff(0.0), 1.0, 1.0, SolverOptions{}};
    const SolveReport rep = fixed_point(prob, pair2, 1e-6, 50);
    CHECK(rep.converged);
    CHECK(rep.ordering_ok);
    for (std::size_t i = 0; i < g2.node_count(); ++i)
      if (!g2.is_boundary(i)) CHECK(rep.solution[i] > 0.0);
  }
}

TEST_CASE("pair verification") {
  const Grid g = make_interval(0, 1, 65);
  const ScalarField p2 = constant_field(g, 2.0);

  SECTION("zero nonlinearities: any ordered pair with signed operators passes") {
    SolverOptions tight;
    tight.tol = 1e-10;
    tight.max_iter = 300000;
    const ScalarField sup = torsion(1.0, p2, g, tight);  // -lap sup = 1 >= 0
    const SubSuperPair pair = SubSuperPair::make(constant_field(g, 0.0), sup);
    const auto prob = simple_problem(g, constant_coeff(1.0), constant_coeff(0.0),
                                     constant_coeff(0.0));
    const PairReport rep = verify_pair(pair, prob, 3);
    CHECK(rep.sub_violation <= 1e-9);
    CHECK(rep.sup_violation <= 1e-9);
    CHECK(rep.ok());
    CHECK(rep.probes == 5);
  }

  SECTION("a broken supersolution is flagged") {
    // sub = 0 and sup = 0 cannot dominate a strictly positive forcing
    const SubSuperPair pair =
        SubSuperPair::make(constant_field(g, 0.0), constant_field(g, 0.0));
    const auto prob = simple_problem(g, constant_coeff(1.0), constant_coeff(1.0),
                                     constant_coeff(0.0));
    const PairReport rep = verify_pair(pair, prob, 1);
    CHECK(rep.sup_violation > 1e-6);
    CHECK_FALSE(rep.ok());
  }
}
