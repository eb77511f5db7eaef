#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "varexp/run.hpp"

using namespace varexp;
namespace fs = std::filesystem;

namespace {

const char* kSublinearSmall = R"(
# small sublinear instance
[domain]
dim = 1
x = 0 1
n = 65

[exponents]
p = 1.8 + 0.1*sin(3.141592653589793*x1)
alpha = 0.1
beta = 0.2

[coefficients]
A = 1 + t

[run]
app = sublinear
a0 = 1
K_knob = 2
tol_fp = 1e-6
max_outer = 200
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config(kSublinearSmall);
  CHECK(cfg.dim == 1);
  CHECK(cfg.n[0] == 65);
  CHECK(cfg.app == Application::Sublinear);
  CHECK(cfg.q_expr == "2");  // preset default
  CHECK(cfg.a0 == 1.0);
  CHECK(cfg.tol_fp == 1e-6);
  CHECK(cfg.solution_file == "solution.csv");

  SECTION("unknown keys, bad sections, duplicates") {
    CHECK_THROWS_AS(parse_config("[domain]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nope]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\napp = sublinear\napp = logistic\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[domain]\ndim = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[domain]\nn = 9 9 9\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(""), ConfigError);  // p is required
  }
}

TEST_CASE("config compilation") {
  SECTION("valid config compiles and samples exponents") {
    const CompiledConfig cc = compile_config(parse_config(kSublinearSmall));
    CHECK(cc.grid.node_count() == 65);
    CHECK(cc.exponents.p_minus >= 1.8);
    CHECK(cc.h0.pass());
    CHECK(cc.h0.has_warnings());  // sup p >= N = 1 always warns in 1d
  }

  SECTION("inf p <= 1 is a config error citing the hypothesis") {
    std::string text = kSublinearSmall;
    const auto pos = text.find("p = 1.8");
    text.replace(pos, 7, "p = 0.9");
    try {
      compile_config(parse_config(text));
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("(H0)") != std::string::npos);
    }
  }

  SECTION("variable scope is enforced per slot") {
    std::string text = kSublinearSmall;
    const auto pos = text.find("alpha = 0.1");
    text.replace(pos, 11, "alpha = t  ");
    CHECK_THROWS_AS(compile_config(parse_config(text)), ConfigError);
  }

  SECTION("the logistic app needs f(t) alone and a positive lambda_tilde") {
    std::string text = kSublinearSmall;
    text += "\n[coefficients]\nf = x1*t\n";
    // rewrite app
    const auto pos = text.find("app = sublinear");
    text.replace(pos, 15, "app = logistic ");
    text += "[run]\nlambda_tilde = 200\n";
    // duplicate sections are fine, duplicate keys are not; rebuild cleanly:
    std::string clean = R"(
[domain]
dim = 1
x = 0 1
n = 33
[exponents]
p = 2
[coefficients]
f = x1*t
A = 1
[run]
app = logistic
lambda_tilde = 200
)";
    CHECK_THROWS_AS(compile_config(parse_config(clean)), ConfigError);
    std::string no_lt = clean;
    const auto p2 = no_lt.find("f = x1*t");
    no_lt.replace(p2, 8, "f = t*(1-t)");
    const auto p3 = no_lt.find("lambda_tilde = 200");
    no_lt.replace(p3, 18, "lambda_tilde = 0  ");
    CHECK_THROWS_AS(compile_config(parse_config(no_lt)), ConfigError);
  }
}

TEST_CASE("run execution and artifacts") {
  const RunConfig cfg = parse_config(kSublinearSmall);

  SECTION("a converged ordered run exits 0 and writes the artifacts") {
    const fs::path dir = fresh_dir("varexp-test-run0");
    std::ostringstream log;
    const int code = execute_run(cfg, dir.string(), true, log);
    CHECK(code == 0);
    REQUIRE(fs::exists(dir / "solution.csv"));
    REQUIRE(fs::exists(dir / "trace.csv"));
    REQUIRE(fs::exists(dir / "summary.txt"));
    const std::string summary = slurp(dir / "summary.txt");
    CHECK(summary.find("converged = true") != std::string::npos);
    CHECK(summary.find("ordering_ok = true") != std::string::npos);
    CHECK(summary.find("partial_artifacts = false") != std::string::npos);
    CHECK(summary.find("threads = ") != std::string::npos);
    CHECK(summary.find("wall_time_s = ") != std::string::npos);

    const std::string sol = slurp(dir / "solution.csv");
    CHECK(sol.rfind("x1,u,sub,sup,distance\n", 0) == 0);

    SECTION("a second identical run is byte-identical") {
      const fs::path dir2 = fresh_dir("varexp-test-run1");
      std::ostringstream log2;
      CHECK(execute_run(cfg, dir2.string(), true, log2) == 0);
      CHECK(slurp(dir2 / "solution.csv") == sol);
      CHECK(slurp(dir2 / "trace.csv") == slurp(dir / "trace.csv"));
    }
  }

  SECTION("2d custom run writes both coordinate columns") {
    const char* text = R"(
[domain]
dim = 2
x = 0 1
y = 0 1
n = 17
[exponents]
p = 2
alpha = 0.1
beta = 0.2
[coefficients]
A = 1 + t
f = t^0.2
[run]
app = custom
k = 8
lambda = 4
tol_fp = 1e-6
max_outer = 100
)";
    const fs::path dir = fresh_dir("varexp-test-run2d");
    std::ostringstream log;
    const int code = execute_run(parse_config(text), dir.string(), true, log);
    CHECK(code == 0);
    const std::string sol = slurp(dir / "solution.csv");
    CHECK(sol.rfind("x1,x2,u,sub,sup,distance\n", 0) == 0);
  }

  SECTION("violated problem hypotheses exit 1") {
    RunConfig bad = cfg;
    bad.a0 = -1.0;  // the sublinear pipeline needs a0 > 0
    const fs::path dir = fresh_dir("varexp-test-badhyp");
    std::ostringstream log;
    CHECK(execute_run(bad, dir.string(), true, log) == 1);
  }

  SECTION("forced non-convergence exits 2 and still writes the trace") {
    RunConfig capped = cfg;
    capped.max_outer = 1;
    const fs::path dir = fresh_dir("varexp-test-run2");
    std::ostringstream log;
    const int code = execute_run(capped, dir.string(), true, log);
    CHECK(code == 2);
    CHECK(fs::exists(dir / "trace.csv"));
    const std::string summary = slurp(dir / "summary.txt");
    CHECK(summary.find("converged = false") != std::string::npos);
  }
}
