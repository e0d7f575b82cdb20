#include "invhull_cli/commands.hpp"

#include "invhull/curve.hpp"
#include "invhull/density.hpp"
#include "invhull/disk_mesh.hpp"
#include "invhull/errors.hpp"
#include "invhull/hull1d.hpp"
#include "invhull/pointwise_hull.hpp"
#include "invhull/reparam2d.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef INVHULL_VERSION
#define INVHULL_VERSION "0.0.0"
#endif

namespace invhull::cli {

namespace {

bool is_builtin_curve(const std::string& spec) {
  return spec == "parabola" || spec == "helix" || spec.rfind("line:", 0) == 0;
}

Json header(const RunConfig& cfg) {
  Json j;
  j["tool"] = "invhull";
  j["version"] = version();
  j["command"] = to_string(cfg.command);
  return j;
}

Json matrix_json(const MatrixF& f) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < f.cols(); ++k) row.push_back(f(i, k));
    rows.push_back(row);
  }
  return rows;
}

Json matrix_json(const SquareMat& x) { return matrix_json(MatrixF(x)); }

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(17);
  return out;
}

}  // namespace

std::string version() { return INVHULL_VERSION; }

Report run_hull1d(const RunConfig& cfg) {
  cfg.validate();
  const Density w = make_density(cfg.density);
  const SampledCurve u =
      is_builtin_curve(cfg.curve) ? make_builtin_curve(cfg.curve, cfg.n) : read_curve_csv(cfg.curve);
  Hull1DOptions options;
  options.oracle_iters = cfg.iters;
  options.seed = cfg.seed;
  options.probe_j_max = cfg.probe_j_max;
  const HullResult1D r = invariant_hull_1d(w, u, options);

  Report report;
  report.data = header(cfg);
  report.data["config"] = {{"density", cfg.density}, {"curve", cfg.curve}, {"n", u.cells()},
                           {"iters", cfg.iters}, {"probe_j", cfg.probe_j_max}, {"seed", cfg.seed}};
  Json res;
  res["density"] = w.id();
  res["n"] = u.cells();
  res["I"] = r.functional;
  res["I_i"] = r.value;
  res["c"] = r.c ? Json(*r.c) : Json(nullptr);
  res["status"] = to_string(r.status);
  res["oracle_value"] = r.oracle_value ? Json(*r.oracle_value) : Json(nullptr);
  res["el_stdev"] = r.el_stdev;
  res["residuals"] = {{"normalization", r.normalization_residual}};
  res["probe"] = to_json(r.probe);
  report.data["result"] = res;

  if (cfg.csv_path && !r.probe.empty()) {
    auto out = open_csv(*cfg.csv_path);
    out << "j,value\n";
    for (std::size_t j = 0; j < r.probe.size(); ++j) out << j + 1 << "," << r.probe[j] << "\n";
  }
  if (cfg.svg_path && !r.probe.empty()) emit_svg(r.probe, *cfg.svg_path);
  return report;
}

Report run_pointwise(const RunConfig& cfg) {
  cfg.validate();
  const Density w = make_density(cfg.density);
  const MatrixF f = parse_matrix(cfg.matrix);
  PointwiseHullOptions options;
  options.starts = cfg.starts;
  options.seed = cfg.seed;
  const PointwiseHullResult r = pointwise_hull(w, f, options);

  Report report;
  report.data = header(cfg);
  report.data["config"] = {{"density", cfg.density}, {"matrix", cfg.matrix},
                           {"starts", cfg.starts}, {"seed", cfg.seed}};
  Json res;
  res["density"] = w.id();
  res["F"] = matrix_json(f);
  res["value"] = r.value ? Json(*r.value) : Json(nullptr);
  res["unbounded_below"] = r.unbounded_below;
  res["W_of_F"] = eval_density(w, f);
  res["volume_density"] = volume_density(f);
  res["spread"] = r.spread;
  res["n_starts"] = r.n_starts;
  res["argmin_X"] = matrix_json(r.argmin_x.matrix());
  // The criticality equation belongs to W^N; report it for that family only.
  const int n = static_cast<int>(f.cols());
  const bool is_wn = w.id() == "wn:" + std::to_string(n) || (n == 2 && w.id() == "quadratic");
  res["residual_at_argmin"] =
      is_wn && r.value ? Json(criticality_residual(f, r.argmin_x)) : Json(nullptr);
  report.data["result"] = res;
  return report;
}

Report run_surface(const RunConfig& cfg) {
  cfg.validate();
  const auto mesh = build_disk_mesh(cfg.levels);
  const SurfaceMap u = make_builtin_surface(cfg.surface);
  const SurfaceSample s = sample_surface(mesh, u);
  if (!s.is_regular()) throw RegularityError("surface '" + cfg.surface + "' is not regular");
  const BeltramiField mu = beltrami_coefficient(s);
  const double dirichlet = dirichlet_energy(s);
  const double area = area_functional(s);

  Report report;
  report.data = header(cfg);
  report.data["config"] = {{"surface", cfg.surface}, {"levels", cfg.levels},
                           {"method", to_string(cfg.method)}, {"iters", cfg.iters},
                           {"perturb", cfg.perturb}, {"seed", cfg.seed}};
  Json res;
  res["level"] = cfg.levels;
  res["vertices"] = mesh->vertex_count();
  res["triangles"] = mesh->triangle_count();
  res["dirichlet"] = dirichlet;
  res["area"] = area;
  res["mu_max"] = mu.max_abs();

  const BoundaryPolicy policy = BoundaryPolicy::three_point();
  std::vector<double> history;
  double e_final = dirichlet;
  double defect = conformality_defect(s, DiskDiffeo::identity(mesh, policy));
  if (cfg.method != SurfaceMethod::descent) {
    const DiskDiffeo phi = linear_beltrami_solve(mesh, mu, policy);
    const double e = energy_of_reparam(s, phi);
    Json lbs;
    lbs["E"] = e;
    lbs["gap_rel"] = (e - area) / area;
    lbs["defect"] = conformality_defect(s, phi);
    lbs["beltrami_residual"] = beltrami_residual(phi, mu);
    lbs["min_det"] = phi.min_det();
    res["lbs"] = lbs;
    e_final = e;
    defect = lbs["defect"].get<double>();
    history = {dirichlet, e};
  }
  if (cfg.method != SurfaceMethod::lbs) {
    const DiskDiffeo phi0 = cfg.perturb > 0.0 ? random_diffeo(mesh, policy, cfg.perturb, cfg.seed)
                                              : DiskDiffeo::identity(mesh, policy);
    const DescentResult r = inner_variation_descent(s, phi0, cfg.iters);
    const double e = r.history.back();
    Json descent;
    descent["E"] = e;
    descent["gap_rel"] = (e - area) / area;
    descent["defect"] = conformality_defect(s, r.phi);
    descent["iterations"] = r.iterations;
    descent["stalled"] = r.stalled;
    descent["min_det"] = r.phi.min_det();
    res["descent"] = descent;
    e_final = e;
    defect = descent["defect"].get<double>();
    history = r.history;
  }
  res["E_final"] = e_final;
  res["gap_rel"] = (e_final - area) / area;
  res["defect"] = defect;
  res["history"] = to_json(history);
  report.data["result"] = res;

  if (cfg.svg_path) emit_svg(history, *cfg.svg_path);
  if (cfg.csv_path) {
    const EnergyReport sweep = refinement_study(u, 0, cfg.levels);
    auto out = open_csv(*cfg.csv_path);
    out << "level,dirichlet,area\n";
    for (const auto& h : sweep.history) out << h.level << "," << h.dirichlet << "," << h.area << "\n";
  }
  if (cfg.mesh_path) write_off(*mesh, *cfg.mesh_path);
  if (cfg.obj_path) write_obj(s, *cfg.obj_path);
  return report;
}

Report run(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::hull1d:
      return run_hull1d(cfg);
    case Command::pointwise:
      return run_pointwise(cfg);
    case Command::surface:
      return run_surface(cfg);
    case Command::verify:
      return run_verify(cfg);
  }
  throw UsageError("unknown command");
}

std::string render_svg(const std::vector<double>& history) {
  if (history.empty()) throw UsageError("cannot plot an empty history");
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 400.0;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 20.0;
  constexpr double kBottom = 50.0;
  const auto [lo_it, hi_it] = std::minmax_element(history.begin(), history.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](std::size_t i) {
    return history.size() == 1 ? kLeft : kLeft + plot_w * i / (history.size() - 1.0);
  };
  // A constant history is drawn as a horizontal line through the middle.
  auto py = [&](double v) {
    return hi > lo ? kTop + plot_h * (hi - v) / (hi - lo) : kTop + 0.5 * plot_h;
  };

  std::ostringstream svg;
  char buf[96];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\"/>\n";
  svg << "</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  std::snprintf(buf, sizeof buf, "%.6g", hi);
  svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.6g", lo);
  svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + plot_h << "\" text-anchor=\"end\">" << buf
      << "</text>\n";
  svg << "<text x=\"" << kLeft + 0.5 * plot_w << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">iteration (0.." << history.size() - 1 << ")</text>\n";
  svg << "</g>\n";
  svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", px(i), py(history[i]));
    svg << buf;
  }
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

void emit_svg(const std::vector<double>& history, const std::string& path) {
  const std::string svg = render_svg(history);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << svg;
}

}  // namespace invhull::cli
