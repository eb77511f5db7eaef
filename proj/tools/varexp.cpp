#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "varexp/run.hpp"

using namespace varexp;

int main(int argc, char** argv) {
  CLI::App cli{"varexp: sub-supersolution bracketing solver for nonlocal p(x)-Laplacian "
               "Dirichlet problems"};
  std::string config_path;
  std::string out_dir = ".";
  std::string app_override;
  bool quiet = false;
  cli.add_option("--config", config_path, "run configuration file")->required();
  cli.add_option("--out", out_dir, "output directory (created if missing)");
  cli.add_option("--app", app_override,
                 "override the configured application "
                 "(sublinear|concave-convex|logistic|custom)");
  cli.add_flag("--quiet", quiet, "suppress progress output");
  CLI11_PARSE(cli, argc, argv);

  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config file: " << config_path << "\n";
      return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config(buf.str());

    if (!app_override.empty()) {
      if (app_override == "sublinear") cfg.app = Application::Sublinear;
      else if (app_override == "concave-convex") cfg.app = Application::ConcaveConvex;
      else if (app_override == "logistic") cfg.app = Application::Logistic;
      else if (app_override == "custom") cfg.app = Application::Custom;
      else {
        std::cerr << "unknown application: " << app_override << "\n";
        return 1;
      }
    }
    return execute_run(cfg, out_dir, quiet, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
