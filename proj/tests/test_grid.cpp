#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_util.hpp"
#include "varexp/grid.hpp"

using namespace varexp;

TEST_CASE("make_grid basics") {
  const Grid g1 = make_interval(0.0, 1.0, 3);
  REQUIRE(g1.node_count() == 3);
  CHECK(g1.coord(0)[0] == 0.0);
  CHECK(g1.coord(1)[0] == 0.5);
  CHECK(g1.coord(2)[0] == 1.0);

  const Grid g2 = make_rectangle(0, 1, 0, 1, 3, 3);
  REQUIRE(g2.node_count() == 9);
  int boundary = 0, interior = 0;
  for (std::size_t i = 0; i < g2.node_count(); ++i)
    (g2.is_boundary(i) ? boundary : interior)++;
  CHECK(boundary == 8);
  CHECK(interior == 1);

  CHECK_THROWS_AS(make_interval(0.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_interval(1.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_interval(2.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(3, {{{0, 1}, {0, 1}}}, {4, 4}), std::invalid_argument);
}

TEST_CASE("boundary classification is total and disjoint") {
  for (const Grid& g : {make_interval(-2, 3, 17), make_rectangle(0, 2, -1, 1, 9, 7)}) {
    std::size_t boundary = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
      if (g.is_boundary(i)) ++boundary;
    if (g.dim == 1)
      CHECK(boundary == 2);
    else
      CHECK(boundary == 2 * (g.n[0] + g.n[1]) - 4);
  }
}

TEST_CASE("distance field") {
  const Grid g1 = make_interval(0, 1, 11);
  const ScalarField d1 = distance_field(g1);
  CHECK(d1[3] == Catch::Approx(0.3).margin(1e-15));  // x = 0.3
  CHECK(d1[0] == 0.0);
  CHECK(d1[10] == 0.0);

  const Grid g2 = make_rectangle(0, 1, 0, 1, 11, 11);
  const ScalarField d2 = distance_field(g2);
  CHECK(d2[g2.index(5, 5)] == Catch::Approx(0.5).margin(1e-15));
  CHECK(d2[g2.index(1, 4)] == Catch::Approx(0.1).margin(1e-15));

  SECTION("nonnegative, zero exactly on boundary, 1-Lipschitz across neighbors") {
    for (const Grid& g : {make_interval(-1, 2, 31), make_rectangle(0, 2, 0, 1, 13, 9)}) {
      const ScalarField d = distance_field(g);
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        CHECK(d[i] >= 0.0);
        CHECK((d[i] == 0.0) == g.is_boundary(i));
        const auto ij = g.multi_index(i);
        if (ij[0] + 1 < g.n[0]) {
          const double dn = d[g.index(ij[0] + 1, ij[1])];
          CHECK(std::abs(d[i] - dn) <= g.h[0] + 1e-12);
        }
        if (g.dim == 2 && ij[1] + 1 < g.n[1]) {
          const double dn = d[g.index(ij[0], ij[1] + 1)];
          CHECK(std::abs(d[i] - dn) <= g.h[1] + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("trapezoidal quadrature") {
  const Grid g = make_interval(0, 1, 64);
  CHECK(integrate(constant_field(g, 1.0)) == Catch::Approx(1.0).margin(1e-14));
  CHECK(integrate(field_from(g, [](const Point& x) { return x[0]; })) ==
        Catch::Approx(0.5).margin(1e-14));

  const Grid gf = make_interval(0, 1, 256);
  const double i256 = integrate(field_from(gf, [](const Point& x) { return x[0] * x[0]; }));
  CHECK(std::abs(i256 - 1.0 / 3.0) < 1e-5);
  // fine-grid oracle pins the limit
  const Grid gr = make_interval(0, 1, 4097);
  const double fine = integrate(field_from(gr, [](const Point& x) { return x[0] * x[0]; }));
  CHECK(std::abs(fine - 1.0 / 3.0) < 1e-7);
  CHECK(std::abs(i256 - fine) < 1e-5);

  SECTION("2d measure") {
    const Grid g2 = make_rectangle(0, 2, 0, 3, 17, 9);
    CHECK(integrate(constant_field(g2, 1.0)) == Catch::Approx(6.0).margin(1e-12));
  }

  SECTION("linearity to machine precision") {
    testutil::Rng rng(7);
    const Grid gl = make_interval(0, 2, 97);
    const ScalarField u = testutil::random_field(gl, rng, -1, 1);
    const ScalarField v = testutil::random_field(gl, rng, -1, 1);
    for (int rep = 0; rep < 20; ++rep) {
      const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
      ScalarField w(gl);
      for (std::size_t i = 0; i < gl.node_count(); ++i) w[i] = a * u[i] + b * v[i];
      CHECK(std::abs(integrate(w) - (a * integrate(u) + b * integrate(v))) < 1e-13);
    }
  }
}

TEST_CASE("nodal gradient") {
  const Grid g = make_interval(0, 1, 101);
  SECTION("constant and affine fields are exact") {
    const VectorField gc = gradient(constant_field(g, 4.2));
    for (std::size_t i = 0; i < g.node_count(); ++i)
      CHECK(std::abs(gc.comp[0][i]) < 1e-13);  // one-sided rows round at eps/h
    const VectorField ga = gradient(field_from(g, [](const Point& x) { return 3 * x[0] - 1; }));
    for (std::size_t i = 0; i < g.node_count(); ++i)
      CHECK(ga.comp[0][i] == Catch::Approx(3.0).margin(1e-12));
  }
  SECTION("quadratic at the midpoint") {
    const VectorField gq =
        gradient(field_from(g, [](const Point& x) { return x[0] * x[0]; }));
    CHECK(std::abs(gq.comp[0][50] - 1.0) < 1e-10);  // node x = 0.5
  }
  SECTION("2d affine exact including one-sided boundary rows") {
    const Grid g2 = make_rectangle(0, 1, 0, 2, 9, 13);
    const VectorField ga =
        gradient(field_from(g2, [](const Point& x) { return 2 * x[0] - 3 * x[1] + 1; }));
    for (std::size_t i = 0; i < g2.node_count(); ++i) {
      CHECK(ga.comp[0][i] == Catch::Approx(2.0).margin(1e-12));
      CHECK(ga.comp[1][i] == Catch::Approx(-3.0).margin(1e-12));
    }
  }
}
