#include "invhull_cli/commands.hpp"

#include "invhull/errors.hpp"
#include "invhull/parallel.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace invhull;
using namespace invhull::cli;

namespace {

void add_outputs(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--report", cfg.report_path, "write the JSON report here (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant hulls of integral functionals"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  RunConfig cfg;
  int workers = 0;
  std::string method = "both";
  app.add_option("--workers", workers, "worker threads (default: INVHULL_WORKERS or 1)")
      ->check(CLI::NonNegativeNumber);

  auto* hull = app.add_subcommand("hull1d", "invariant hull of a 1D functional on a curve");
  hull->add_option("--density", cfg.density, "density id, e.g. quadratic, ppower:3, norm");
  hull->add_option("--curve", cfg.curve, "built-in curve (parabola, helix, line:a,b,c) or CSV path");
  hull->add_option("--n", cfg.n, "grid cells for built-in curves");
  hull->add_option("--iters", cfg.iters, "direct minimizer iterations");
  hull->add_option("--probe-j", cfg.probe_j_max, "largest exponent of the triviality probe");
  hull->add_option("--seed", cfg.seed, "random seed");
  hull->add_option("--csv", cfg.csv_path, "probe values as CSV");
  hull->add_option("--svg", cfg.svg_path, "probe values as SVG");
  add_outputs(hull, cfg);

  auto* point = app.add_subcommand("pointwise", "pointwise hull of a density at a matrix");
  point->add_option("--density", cfg.density, "density id, e.g. wn:2, product");
  point->add_option("--matrix", cfg.matrix, "matrix literal 'a,b;c,d;e,f'")->required();
  point->add_option("--starts", cfg.starts, "Nelder-Mead starts");
  point->add_option("--seed", cfg.seed, "random seed");
  add_outputs(point, cfg);

  auto* surf = app.add_subcommand("surface", "reparameterization hull of a surface on the disk");
  surf->add_option("--surface", cfg.surface, "flat, stretch:a,b or graph:sin:amp");
  surf->add_option("--levels", cfg.levels, "mesh refinement level");
  surf->add_option("--method", method, "lbs, descent or both");
  surf->add_option("--iters", cfg.iters, "descent iterations");
  surf->add_option("--perturb", cfg.perturb, "start descent from a random diffeomorphism");
  surf->add_option("--seed", cfg.seed, "random seed");
  surf->add_option("--svg", cfg.svg_path, "energy history as SVG");
  surf->add_option("--csv", cfg.csv_path, "refinement sweep as CSV");
  surf->add_option("--mesh", cfg.mesh_path, "mesh as OFF");
  surf->add_option("--obj", cfg.obj_path, "sampled surface as OBJ");
  add_outputs(surf, cfg);

  auto* verify = app.add_subcommand("verify", "run the property suite");
  verify->add_option("--seed", cfg.seed, "random seed");
  add_outputs(verify, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*hull) cfg.command = Command::hull1d;
    if (*point) cfg.command = Command::pointwise;
    if (*surf) {
      cfg.command = Command::surface;
      cfg.method = parse_method(method);
    }
    if (*verify) cfg.command = Command::verify;
    if (workers > 0) set_worker_count(workers);

    const Report report = run(cfg);
    if (cfg.report_path) {
      report.write(*cfg.report_path);
    } else {
      std::cout << report.to_json();
    }
    if (report.failed) {
      std::cerr << "invhull: property suite failed\n";
      return kExitPropertyFailure;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "invhull: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "invhull: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "invhull: " << e.what() << "\n";
    return kExitNumerical;
  }
}
