#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "varexp/expr.hpp"

using namespace varexp::expr;

namespace {
const std::vector<std::string> XT = {"x1", "x2", "t"};
const std::vector<std::string> X_ONLY = {"x1"};

double eval_at(const std::string& src, double x1 = 0, double x2 = 0, double t = 0) {
  Env env;
  env.x1 = x1;
  env.x2 = x2;
  env.t = t;
  return Expr::parse(src, XT)(env);
}
}  // namespace

TEST_CASE("expression evaluation") {
  CHECK(eval_at("1.5+0.2*sin(3.14159*x1)", 0.5) == Catch::Approx(1.7).margin(1e-6));
  CHECK(eval_at("1+2*3") == 7.0);
  CHECK(eval_at("6/3/2") == 1.0);
  CHECK(eval_at("2^3^2") == 512.0);       // right associative
  CHECK(eval_at("-x1^2", 3.0) == -9.0);   // ^ binds above unary minus
  CHECK(eval_at("2^-1") == 0.5);
  CHECK(eval_at("(1+2)*3") == 9.0);
  CHECK(eval_at("min(3, max(1, 2))") == 2.0);
  CHECK(eval_at("abs(-4.5)") == 4.5);
  CHECK(eval_at("exp(ln(7))") == Catch::Approx(7.0).epsilon(1e-14));
  CHECK(eval_at("cos(0)") == 1.0);
  CHECK(eval_at(".5 + 1e-3 + 2.5e+1") == Catch::Approx(25.501).epsilon(1e-14));
  CHECK(eval_at("t^0.5", 0, 0, 9.0) == 3.0);
  CHECK(eval_at("(-2)^2") == 4.0);
}

TEST_CASE("parse errors carry byte offsets") {
  SECTION("incomplete power") {
    try {
      Expr::parse("x1^", XT);
      FAIL("expected a ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset == 3);
    }
  }
  SECTION("out-of-scope identifier") {
    try {
      Expr::parse("t", X_ONLY);
      FAIL("expected a ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset == 0);
      CHECK(std::string(e.what()).find("unknown identifier 't'") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(Expr::parse("1 +", XT), ParseError);
  CHECK_THROWS_AS(Expr::parse("(1", XT), ParseError);
  CHECK_THROWS_AS(Expr::parse("1 2", XT), ParseError);
  CHECK_THROWS_AS(Expr::parse("min(1)", XT), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin(1, 2)", XT), ParseError);
  CHECK_THROWS_AS(Expr::parse("bogus(1)", XT), ParseError);
  CHECK_THROWS_AS(Expr::parse("", XT), ParseError);
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(eval_at("ln(0)"), EvalError);
  CHECK_THROWS_AS(eval_at("ln(-1)"), EvalError);
  CHECK_THROWS_AS(eval_at("0^-1"), EvalError);
  CHECK_THROWS_AS(eval_at("(-2)^0.5"), EvalError);
}

TEST_CASE("print/parse round trip") {
  const std::vector<std::string> corpus = {
      "1.5+0.2*sin(3.14159*x1)",
      "-x1^2 + 3*x2/(t - 4)",
      "min(x1, max(x2, t))",
      "exp(-(x1-0.5)^2/0.01)",
      "2^-3 * abs(x1 - x2) + ln(t + 10)",
      "((x1))",
      "1e-8",
      "0.30000000000000004",
  };
  for (const auto& src : corpus) {
    const Expr a = Expr::parse(src, XT);
    const Expr b = Expr::parse(a.str(), XT);
    CHECK(a == b);
    CHECK(a.str() == b.str());
  }
}
