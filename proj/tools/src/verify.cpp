#include "invhull_cli/commands.hpp"

#include "invhull/curve.hpp"
#include "invhull/density.hpp"
#include "invhull/disk_mesh.hpp"
#include "invhull/errors.hpp"
#include "invhull/hull1d.hpp"
#include "invhull/pointwise_hull.hpp"
#include "invhull/quadrature.hpp"
#include "invhull/reparam2d.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace invhull::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

// measured < threshold
Outcome below(double measured, double threshold, std::string detail = {}) {
  return {measured, threshold, measured < threshold, std::move(detail)};
}

// Every public operation of the engine modules and the CLI, by module.
struct Operation {
  const char* module;
  const char* name;
};

constexpr Operation kRequiredOps[] = {
    {"densities", "eval_density"},
    {"densities", "section"},
    {"densities", "g_function"},
    {"densities", "wbar"},
    {"densities", "radial_convexity_probe"},
    {"hull1d", "evaluate_functional_1d"},
    {"hull1d", "invert_g"},
    {"hull1d", "solve_c"},
    {"hull1d", "invariant_hull_1d"},
    {"hull1d", "direct_minimize_reparam"},
    {"hull1d", "triviality_probe"},
    {"pointwise_hull", "pointwise_hull"},
    {"pointwise_hull", "volume_density"},
    {"pointwise_hull", "optimal_X_closed_form"},
    {"pointwise_hull", "criticality_residual"},
    {"disk_mesh", "build_disk_mesh"},
    {"disk_mesh", "sample_surface"},
    {"disk_mesh", "dirichlet_energy"},
    {"disk_mesh", "area_functional"},
    {"reparam2d", "beltrami_coefficient"},
    {"reparam2d", "linear_beltrami_solve"},
    {"reparam2d", "energy_of_reparam"},
    {"reparam2d", "inner_variation_descent"},
    {"reparam2d", "conformality_defect"},
    {"reparam2d", "random_diffeo"},
    {"cli", "run_hull1d"},
    {"cli", "run_verify"},
    {"cli", "emit_svg"},
};

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  // A generator private to one property, so properties do not share streams.
  std::mt19937_64 rng(int salt) const { return std::mt19937_64(seed_ + 7919u * salt); }

  void touch(std::initializer_list<const char*> ops) { covered_.insert(ops.begin(), ops.end()); }

  void check(const std::string& module, const std::string& name,
             const std::function<Outcome()>& body) {
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {std::numeric_limits<double>::quiet_NaN(), 0.0, false, std::string("threw: ") + e.what()};
    }
    Json p;
    p["module"] = module;
    p["name"] = name;
    p["passed"] = o.passed;
    p["measured"] = o.measured;
    p["threshold"] = o.threshold;
    if (!o.detail.empty()) p["detail"] = o.detail;
    properties_.push_back(p);
    if (!o.passed) ++failed_;
  }

  Json coverage() const {
    Json missing = Json::array();
    Json covered = Json::array();
    for (const auto& op : kRequiredOps) {
      (covered_.count(op.name) ? covered : missing).push_back(std::string(op.module) + "." + op.name);
    }
    return {{"required", std::size(kRequiredOps)}, {"covered", covered}, {"missing", missing}};
  }

  bool all_covered() const {
    return std::all_of(std::begin(kRequiredOps), std::end(kRequiredOps),
                       [&](const Operation& op) { return covered_.count(op.name) > 0; });
  }

  const Json& properties() const { return properties_; }
  int failed() const { return failed_; }

 private:
  std::uint64_t seed_;
  std::set<std::string> covered_;
  Json properties_ = Json::array();
  int failed_ = 0;
};

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

// Gaussian m x n matrix with condition number below 1e3.
MatrixF random_regular(std::mt19937_64& rng, int m, int n) {
  std::normal_distribution<double> z;
  for (;;) {
    MatrixF f(m, n);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = z(rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(f)};
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) > 1e-3 * s(0)) return f;
  }
}

SquareMat random_positive_det(std::mt19937_64& rng, int n) {
  SquareMat x = random_regular(rng, n, n);
  if (determinant(x) < 0.0) x.col(0) *= -1.0;
  return x;
}

SquareMat random_rotation(std::mt19937_64& rng, int n) {
  const SquareMat g = random_regular(rng, n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(g)};
  SquareMat q = qr.householderQ();
  if (determinant(q) < 0.0) q.col(0) *= -1.0;
  return q;
}

// The shape a density is tested on: its fixed domain dimension, else 2.
MatrixF random_argument(const Density& w, std::mt19937_64& rng) {
  const int n = w.domain_dim().value_or(2);
  return random_regular(rng, n + 1, n);
}

// psi(t) = t + a sin(2 pi k t) / (2 pi k), increasing for |a| < 1.
struct Warp {
  double a;
  int k;
  double operator()(double t) const { return t + a * std::sin(2 * kPi * k * t) / (2 * kPi * k); }
  double slope(double t) const { return 1.0 + a * std::cos(2 * kPi * k * t); }
};

Warp random_warp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-0.8, 0.8);
  std::uniform_int_distribution<int> k(1, 3);
  return {a(rng), k(rng)};
}

double arc_length(const SampledCurve& u) {
  return graded_integral([&](double t) { return u.derivative_at(t).norm(); });
}

// ---------------------------------------------------------------- densities

void densities(Suite& suite) {
  suite.check("densities", "gradient_matches_finite_differences", [&] {
    auto rng = suite.rng(1);
    double worst = 0.0;
    for (const auto& id : builtin_density_examples()) {
      const Density w = make_density(id);
      if (!w.has_analytic_gradient()) continue;
      for (int k = 0; k < 100; ++k) {
        const MatrixF f = random_argument(w, rng);
        const MatrixF g = w.gradient(f);
        MatrixF fd(f.rows(), f.cols());
        constexpr double h = 1e-5;
        for (Eigen::Index i = 0; i < f.size(); ++i) {
          MatrixF p = f;
          MatrixF m = f;
          p.data()[i] += h;
          m.data()[i] -= h;
          fd.data()[i] = (eval_density(w, p) - eval_density(w, m)) / (2 * h);
        }
        worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-12));
      }
    }
    suite.touch({"eval_density"});
    return below(worst, 1e-5, "max relative error over all analytic gradients");
  });

  suite.check("densities", "g_is_section_derivative", [&] {
    auto rng = suite.rng(2);
    double worst = 0.0;
    constexpr double h = 1e-5;
    for (const char* id : {"quadratic", "ppower:3", "ppower:1.5", "norm", "power:0.5"}) {
      const Density w = make_density(id);
      for (int k = 0; k < 20; ++k) {
        const MatrixF x = random_regular(rng, 3, 1);
        for (double r : {0.5, 1.0, 2.0}) {
          const double fd = (section(w, x, r + h) - section(w, x, r - h)) / (2 * h);
          worst = std::max(worst, std::abs(g_function(w, r, x) - fd));
        }
      }
    }
    suite.touch({"section", "g_function"});
    return below(worst, 1e-6, "max |g - central difference of the section|");
  });

  suite.check("densities", "g_monotone_for_radially_convex", [&] {
    auto rng = suite.rng(3);
    int violations = 0;
    int wrong_probe = 0;
    for (const char* id : {"quadratic", "ppower:3", "ppower:1.5", "power:2"}) {
      const Density w = make_density(id);
      for (int k = 0; k < 20; ++k) {
        const MatrixF x = random_regular(rng, 3, 1);
        const auto grid = default_radial_grid(x);
        if (!radial_convexity_probe(w, x, grid).is_strictly_convex) ++wrong_probe;
        for (std::size_t i = 1; i < grid.size(); ++i) {
          if (!(g_function(w, grid[i], x) > g_function(w, grid[i - 1], x))) ++violations;
        }
      }
    }
    // Degree one and concave sections must not pass the probe.
    for (const char* id : {"norm", "power:0.5"}) {
      const Density w = make_density(id);
      const MatrixF x = random_regular(rng, 3, 1);
      if (radial_convexity_probe(w, x, default_radial_grid(x)).is_strictly_convex) ++wrong_probe;
    }
    suite.touch({"radial_convexity_probe"});
    return below(violations + wrong_probe, 1,
                 "count of non-increasing g steps plus misclassified probes");
  });

  suite.check("densities", "declared_homogeneity", [&] {
    auto rng = suite.rng(4);
    double worst = 0.0;
    for (const auto& id : builtin_density_examples()) {
      const Density w = make_density(id);
      for (int k = 0; k < 10; ++k) {
        const MatrixF f = random_argument(w, rng);
        const auto d = w.degree(static_cast<int>(f.cols()));
        if (!d) continue;
        for (double s : {0.5, 2.0, 7.0}) {
          const double lhs = eval_density(w, s * f);
          const double rhs = std::pow(s, *d) * eval_density(w, f);
          worst = std::max(worst, std::abs(lhs - rhs) / std::max(1e-300, std::abs(rhs)));
        }
      }
    }
    return below(worst, 1e-12, "max relative error of W(sF) = s^d W(F)");
  });

  suite.check("densities", "wbar_degree_zero_in_X", [&] {
    auto rng = suite.rng(5);
    double worst = 0.0;
    for (int n : {2, 3}) {
      const Density w = make_density("wn:" + std::to_string(n));
      for (int k = 0; k < 50; ++k) {
        const MatrixF f = random_regular(rng, n + 1, n);
        const SquareMat x = random_positive_det(rng, n);
        const double base = wbar(w, x, f).value();
        for (double s : {0.5, 2.0, 10.0}) {
          const SquareMat sx = s * x;
          worst = std::max(worst, std::abs(wbar(w, sx, f).value() - base) / base);
        }
      }
    }
    suite.touch({"wbar"});
    return below(worst, 1e-12, "max relative change of wbar(W^N, sX, F)");
  });

  suite.check("densities", "adjugate_identity", [&] {
    auto rng = suite.rng(6);
    double worst = 0.0;
    for (int n : {1, 2, 3}) {
      for (int k = 0; k < 50; ++k) {
        const SquareMat x = random_regular(rng, n, n);
        const SquareMat lhs = adjugate(x) * x.transpose();
        const SquareMat rhs = determinant(x) * SquareMat::Identity(n, n);
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
      }
    }
    return below(worst, 1e-12, "max |adj(X) X^T - det(X) I|");
  });

  // (1/2t)|F X|^2 is the section of the quadratic density at F X, hence
  // jointly convex in (t, X).
  suite.check("densities", "perspective_convex_on_segments", [&] {
    auto rng = suite.rng(7);
    std::uniform_real_distribution<double> tpos(0.1, 3.0);
    const Density q = make_density("quadratic");
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const MatrixF f = random_regular(rng, 3, 2);
      const SquareMat x0 = random_regular(rng, 2, 2);
      const SquareMat x1 = random_regular(rng, 2, 2);
      const double t0 = tpos(rng);
      const double t1 = tpos(rng);
      constexpr int kSteps = 32;
      std::vector<double> v(kSteps + 1);
      for (int i = 0; i <= kSteps; ++i) {
        const double a = static_cast<double>(i) / kSteps;
        const SquareMat x = (1 - a) * x0 + a * x1;
        v[i] = section(q, f * x, (1 - a) * t0 + a * t1);
      }
      for (int i = 1; i < kSteps; ++i) {
        const double d2 = v[i - 1] - 2 * v[i] + v[i + 1];
        const double scale = 1.0 + std::abs(v[i]);
        worst = std::max(worst, -d2 / scale);
      }
    }
    return below(worst, 1e-9, "largest negative second difference (relative)");
  });
}

// ------------------------------------------------------------------- hull1d

void hull1d(Suite& suite) {
  suite.check("hull1d", "hull_dominated_by_functional", [&] {
    double worst = -std::numeric_limits<double>::infinity();
    for (const char* id : {"norm", "quadratic", "ppower:3", "ppower:1.5", "power:2"}) {
      const Density w = make_density(id);
      for (int k = 0; k < 50; ++k) {
        const SampledCurve u = random_smooth_curve(suite.seed() + k, 512);
        const double i_u = evaluate_functional_1d(w, u);
        const double i_i = invariant_hull_1d(w, u).value;
        worst = std::max(worst, (i_i - i_u) / (1.0 + std::abs(i_u)));
      }
    }
    suite.touch({"evaluate_functional_1d", "invariant_hull_1d"});
    return below(worst, 1e-6, "max (I_i - I) / (1 + |I|)");
  });

  suite.check("hull1d", "hull_invariant_under_reparameterization", [&] {
    auto rng = suite.rng(11);
    double worst = 0.0;
    for (const char* id : {"quadratic", "ppower:3"}) {
      const Density w = make_density(id);
      for (int k = 0; k < 10; ++k) {
        const SampledCurve u = random_smooth_curve(suite.seed() + 100 + k, 1024);
        const Warp psi = random_warp(rng);
        const SampledCurve v = u.composed(psi, [&](double t) { return psi.slope(t); }, 1024);
        const double a = invariant_hull_1d(w, u).value;
        const double b = invariant_hull_1d(w, v).value;
        worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(a)));
      }
    }
    return below(worst, 5e-4, "max |I_i(u o psi) - I_i(u)| / (1 + I_i)");
  });

  suite.check("hull1d", "direct_minimizer_matches_closed_form", [&] {
    double worst = 0.0;
    for (const char* id : {"quadratic", "ppower:3"}) {
      const Density w = make_density(id);
      for (int k = 0; k < 20; ++k) {
        const SampledCurve u = random_smooth_curve(suite.seed() + 200 + k, 256);
        const double closed = invariant_hull_1d(w, u).value;
        const double direct = direct_minimize_reparam(w, u, 2000, suite.seed()).value;
        worst = std::max(worst, std::abs(direct - closed) / (1.0 + closed));
      }
    }
    suite.touch({"direct_minimize_reparam"});
    return below(worst, 1e-3, "max |direct - closed form| / (1 + value)");
  });

  suite.check("hull1d", "closed_form_matches_arc_length", [&] {
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const SampledCurve u = random_smooth_curve(suite.seed() + 300 + k, 4096);
      const double len = arc_length(u);
      const double q = invariant_hull_1d(make_density("quadratic"), u).value;
      const double p3 = invariant_hull_1d(make_density("ppower:3"), u).value;
      worst = std::max({worst, std::abs(q - 0.5 * len * len) / q,
                        std::abs(p3 - len * len * len / 3.0) / p3});
    }
    return below(worst, 1e-5, "max relative error vs (1/p) L^p");
  });

  suite.check("hull1d", "euler_lagrange_first_integral", [&] {
    double worst = 0.0;
    double norm_defect = 0.0;
    for (const char* id : {"quadratic", "ppower:3", "ppower:1.5"}) {
      const Density w = make_density(id);
      for (int k = 0; k < 10; ++k) {
        const SampledCurve u = random_smooth_curve(suite.seed() + 400 + k, 1024);
        const HullResult1D r = invariant_hull_1d(w, u);
        worst = std::max(worst, r.el_stdev);
        // Independently: the slopes f(c, u'_k) sum to one.
        const double c = solve_c(w, u);
        double sum = 0.0;
        for (const auto& du : u.derivatives()) sum += invert_g(w, c, du) * u.dt();
        norm_defect = std::max(norm_defect, std::abs(sum - 1.0));
      }
    }
    suite.touch({"solve_c", "invert_g"});
    return below(std::max(worst, norm_defect), 1e-6,
                 fmt("el stdev %.3g, normalization defect %.3g", worst, norm_defect));
  });

  suite.check("hull1d", "invert_g_round_trip", [&] {
    auto rng = suite.rng(12);
    std::uniform_real_distribution<double> r(0.05, 20.0);
    double worst = 0.0;
    for (const char* id : {"quadratic", "ppower:3", "ppower:1.5"}) {
      const Density w = make_density(id);
      for (int k = 0; k < 50; ++k) {
        const MatrixF x = random_regular(rng, 3, 1);
        const double r0 = r(rng);
        const double back = invert_g(w, g_function(w, r0, x), x);
        worst = std::max(worst, std::abs(back - r0) / r0);
      }
    }
    return below(worst, 1e-8, "max relative error of f(g(r, x), x) = r");
  });

  // A family of curves, each with several reparameterizations including the
  // optimal one: the I-minimizer of the family is also its I_i-minimizer.
  suite.check("hull1d", "family_minimizers_agree", [&] {
    auto rng = suite.rng(13);
    std::uniform_real_distribution<double> slope(0.3, 1.7);
    double worst = 0.0;
    int index_mismatch = 0;
    for (const char* id : {"quadratic", "ppower:3"}) {
      const Density w = make_density(id);
      double best_i = std::numeric_limits<double>::infinity();
      double best_ii = best_i;
      int arg_i = -1;
      int arg_ii = -1;
      for (int k = 0; k < 5; ++k) {
        const SampledCurve u = random_smooth_curve(suite.seed() + 500 + k, 512);
        const HullResult1D h = invariant_hull_1d(w, u);
        std::vector<std::vector<double>> members;
        members.emplace_back(u.cells(), 1.0);
        members.push_back(h.slopes.slopes);
        for (int j = 0; j < 3; ++j) {
          std::vector<double> s(u.cells());
          for (auto& v : s) v = slope(rng);
          members.push_back(Reparam1D::from_slopes(s).slopes);
        }
        for (const auto& s : members) {
          const double value = reparameterized_functional(w, u, s);
          if (value < best_i) {
            best_i = value;
            arg_i = k;
          }
        }
        if (h.value < best_ii) {
          best_ii = h.value;
          arg_ii = k;
        }
      }
      if (arg_i != arg_ii) ++index_mismatch;
      worst = std::max(worst, std::abs(best_i - best_ii) / best_ii);
    }
    return Outcome{worst, 1e-6, worst < 1e-6 && index_mismatch == 0,
                   fmt("relative gap of the minima; %g argmin mismatches", index_mismatch)};
  });

  suite.check("hull1d", "degree_one_and_trivial_cases", [&] {
    const SampledCurve par = make_builtin_curve("parabola", 1024);
    const HullResult1D n = invariant_hull_1d(make_density("norm"), par);
    const Density half = make_density("power:0.5");
    const SampledCurve line = make_builtin_curve("line:1,0,0", 1024);
    const auto probe = triviality_probe(half, line, 50);
    double probe_err = 0.0;
    for (int j = 1; j <= 50; ++j) {
      probe_err = std::max(probe_err, std::abs(probe[j - 1] - 2.0 * std::sqrt(j + 1.0) / (j + 2.0)));
    }
    const HullResult1D t = invariant_hull_1d(half, line);
    const bool ok = n.status == HullStatus::degree_one_invariant && n.value == n.functional &&
                    t.status == HullStatus::trivial_zero && t.oracle_value &&
                    *t.oracle_value < 0.05 * t.functional;
    suite.touch({"triviality_probe"});
    return Outcome{probe_err, 1e-6, ok && probe_err < 1e-6,
                   "probe error vs 2 sqrt(j+1)/(j+2); norm exact, p=1/2 trivial"};
  });
}

// ----------------------------------------------------------- pointwise_hull

void pointwise(Suite& suite) {
  suite.check("pointwise_hull", "volume_chain_and_agreement", [&] {
    auto rng = suite.rng(21);
    double chain = 0.0;
    double agree = 0.0;
    for (int n : {2, 3}) {
      const Density w = make_density("wn:" + std::to_string(n));
      for (int k = 0; k < 100; ++k) {
        const MatrixF f = random_regular(rng, n + 1, n);
        const auto h = pointwise_hull(w, f, 12, suite.seed() + k);
        if (!h.value) return Outcome{1.0, 0.0, false, "hull unbounded for a regular F"};
        const double v = volume_density(f);
        chain = std::max({chain, v - *h.value, *h.value - eval_density(w, f)});
        agree = std::max(agree, std::abs(*h.value - v) / (1.0 + v));
      }
    }
    suite.touch({"pointwise_hull", "volume_density"});
    return Outcome{agree, 1e-4, agree < 1e-4 && chain <= 1e-6,
                   fmt("chain slack violation %.3g (allowed 1e-6)", chain)};
  });

  suite.check("pointwise_hull", "criticality_at_closed_form", [&] {
    auto rng = suite.rng(22);
    double worst = 0.0;
    double gap = 0.0;
    for (int n : {2, 3}) {
      const Density w = make_density("wn:" + std::to_string(n));
      for (int k = 0; k < 100; ++k) {
        const MatrixF f = random_regular(rng, n + 1, n);
        const MatrixX x = optimal_X_closed_form(f);
        worst = std::max(worst, criticality_residual(f, x));
        gap = std::max(gap, std::abs(wbar(w, x, f).value() - volume_density(f)) / volume_density(f));
      }
    }
    suite.touch({"optimal_X_closed_form", "criticality_residual"});
    return Outcome{worst, 1e-8, worst < 1e-8 && gap < 1e-10,
                   fmt("wbar at the closed form vs volume: %.3g", gap)};
  });

  // The minimizing set is closed under X -> R X for rotations R.
  suite.check("pointwise_hull", "minimum_rotation_invariant", [&] {
    auto rng = suite.rng(23);
    double value_change = 0.0;
    double residual = 0.0;
    for (int n : {2, 3}) {
      const Density w = make_density("wn:" + std::to_string(n));
      for (int k = 0; k < 50; ++k) {
        const MatrixF f = random_regular(rng, n + 1, n);
        const MatrixX x = optimal_X_closed_form(f);
        const MatrixX rx{SquareMat(random_rotation(rng, n) * x.matrix())};
        const double a = wbar(w, x, f).value();
        value_change = std::max(value_change, std::abs(wbar(w, rx, f).value() - a) / a);
        residual = std::max(residual, criticality_residual(f, rx));
      }
    }
    return Outcome{value_change, 1e-12, value_change < 1e-12 && residual < 1e-8,
                   fmt("criticality residual after rotation %.3g", residual)};
  });

  suite.check("pointwise_hull", "product_density_equals_wedge", [&] {
    auto rng = suite.rng(24);
    const Density prod = make_density("product");
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const MatrixF f = random_regular(rng, 3, 2);
      const auto h = pointwise_hull(prod, f, 12, suite.seed() + k);
      if (!h.value) return Outcome{1.0, 0.0, false, "hull unbounded for a regular F"};
      worst = std::max(worst, std::abs(*h.value - volume_density(f)));
    }
    return below(worst, 1e-4, "max |hull(|F1||F2|) - |F1 ^ F2||");
  });

  // Product density below the quadratic one, and their hulls coincide.
  suite.check("pointwise_hull", "product_and_dirichlet_hulls_agree", [&] {
    auto rng = suite.rng(25);
    const Density prod = make_density("product");
    const Density quad = make_density("quadratic");
    double order = 0.0;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const MatrixF f = random_regular(rng, 3, 2);
      order = std::max(order, eval_density(prod, f) - eval_density(quad, f));
      const auto a = pointwise_hull(prod, f, 12, suite.seed() + k);
      const auto b = pointwise_hull(quad, f, 12, suite.seed() + k);
      if (!a.value || !b.value) return Outcome{1.0, 0.0, false, "hull unbounded"};
      worst = std::max(worst, std::abs(*a.value - *b.value));
    }
    return Outcome{worst, 1e-4, worst < 1e-4 && order <= 1e-12,
                   fmt("max product - quadratic %.3g (must be <= 0)", order)};
  });
}

// ---------------------------------------------------------------- disk_mesh

const char* const kCorpus[] = {"flat", "stretch:2,1", "stretch:1,2", "graph:sin:0.3",
                               "graph:sin:0.6"};

void disk_mesh(Suite& suite) {
  suite.check("disk_mesh", "mesh_structure", [&] {
    double worst = 0.0;
    for (int level = 0; level <= 5; ++level) {
      const auto mesh = build_disk_mesh(level);
      mesh->validate();
      const int k = 1 << level;
      const bool counts = mesh->vertex_count() == 1 + 3 * k * (k + 1) &&
                          mesh->triangle_count() == 6 * k * k &&
                          static_cast<int>(mesh->boundary_loop.size()) == 6 * k &&
                          mesh->euler_characteristic() == 1;
      if (!counts) return Outcome{1.0, 0.0, false, "counts wrong at level " + std::to_string(level)};
      // Area of the inscribed regular 6k-gon.
      const double sides = 6.0 * k;
      const double polygon = 0.5 * sides * std::sin(2 * kPi / sides);
      worst = std::max(worst, std::abs(mesh->total_area() - polygon) / polygon);
    }
    suite.touch({"build_disk_mesh"});
    return below(worst, 1e-12, "total area vs inscribed polygon");
  });

  suite.check("disk_mesh", "affine_maps_reproduced", [&] {
    auto rng = suite.rng(31);
    const auto mesh = build_disk_mesh(3);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const MatrixF a = random_regular(rng, 3, 2);
      const Eigen::Vector3d b = random_regular(rng, 3, 1);
      const SurfaceSample s = sample_surface(mesh, [&](const Vec2& x) -> Vec3 { return a * x + b; });
      for (const auto& g : s.grad) worst = std::max(worst, (g - a).cwiseAbs().maxCoeff());
      const double want_e = 0.5 * a.squaredNorm() * mesh->total_area();
      const double want_a = volume_density(a) * mesh->total_area();
      worst = std::max({worst, std::abs(dirichlet_energy(s) - want_e) / want_e,
                        std::abs(area_functional(s) - want_a) / want_a});
    }
    suite.touch({"sample_surface", "dirichlet_energy", "area_functional"});
    return below(worst, 1e-12, "gradients and energies of affine maps");
  });

  suite.check("disk_mesh", "dirichlet_at_least_area", [&] {
    double worst = -std::numeric_limits<double>::infinity();
    for (const char* id : kCorpus) {
      for (int level = 2; level <= 5; ++level) {
        const SurfaceSample s = sample_surface(build_disk_mesh(level), make_builtin_surface(id));
        worst = std::max(worst, (area_functional(s) - dirichlet_energy(s)) / area_functional(s));
      }
    }
    return below(worst, 1e-12, "max (A - E) / A over the corpus");
  });

  suite.check("disk_mesh", "area_invariant_under_diffeomorphisms", [&] {
    const SurfaceMap u = make_builtin_surface("graph:sin:0.3");
    double worst[2] = {0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
      const auto mesh = build_disk_mesh(4 + i);
      const double a = area_functional(sample_surface(mesh, u));
      for (int k = 0; k < 20; ++k) {
        const DiskDiffeo phi = random_diffeo(mesh, BoundaryPolicy::three_point(), 0.05,
                                             suite.seed() + k);
        worst[i] = std::max(worst[i], std::abs(area_functional(pullback(u, phi)) - a) / a);
      }
    }
    suite.touch({"random_diffeo"});
    return Outcome{worst[0], 3e-2, worst[0] < 3e-2 && worst[1] < 1.5e-2 && worst[1] < worst[0],
                   fmt("level 4 %.3g, level 5 %.3g", worst[0], worst[1])};
  });

  suite.check("disk_mesh", "refinement_converges", [&] {
    int violations = 0;
    double last = 0.0;
    for (const char* id : {"graph:sin:0.3", "graph:sin:0.6"}) {
      const EnergyReport r = refinement_study(make_builtin_surface(id), 2, 6);
      double prev = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i + 1 < r.history.size(); ++i) {
        const double d = std::abs(r.history[i].area - r.history[i + 1].area);
        if (!(d < prev)) ++violations;
        prev = d;
      }
      last = std::max(last, prev);
    }
    return Outcome{static_cast<double>(violations), 1.0, violations == 0,
                   fmt("non-decreasing area increments; final increment %.3g", last)};
  });
}

// ---------------------------------------------------------------- reparam2d

void reparam2d(Suite& suite) {
  suite.check("reparam2d", "beltrami_coefficient_examples", [&] {
    const auto mesh = build_disk_mesh(2);
    double worst = 0.0;
    const std::pair<const char*, double> cases[] = {
        {"flat", 0.0}, {"stretch:2,1", 1.0 / 3.0}, {"stretch:1,2", -1.0 / 3.0}};
    for (const auto& [id, want] : cases) {
      const BeltramiField mu = beltrami_coefficient(sample_surface(mesh, make_builtin_surface(id)));
      for (const auto& m : mu.mu) worst = std::max(worst, std::abs(m - std::complex<double>(want)));
    }
    double mu_max = 0.0;
    for (const char* id : kCorpus) {
      for (int level = 2; level <= 5; ++level) {
        const SurfaceSample s = sample_surface(build_disk_mesh(level), make_builtin_surface(id));
        mu_max = std::max(mu_max, beltrami_coefficient(s).max_abs());
      }
    }
    suite.touch({"beltrami_coefficient"});
    return Outcome{worst, 1e-14, worst < 1e-14 && mu_max < 1.0,
                   fmt("max |mu| over the corpus %.6g", mu_max)};
  });

  suite.check("reparam2d", "coefficient_matrix_is_scaled_inverse_metric", [&] {
    const SurfaceSample s = sample_surface(build_disk_mesh(3), make_builtin_surface("graph:sin:0.6"));
    const BeltramiField mu = beltrami_coefficient(s);
    double worst = 0.0;
    for (std::size_t t = 0; t < s.gram.size(); ++t) {
      const Eigen::Matrix2d want = std::sqrt(s.gram[t].determinant()) * s.gram[t].inverse();
      worst = std::max(worst, (beltrami_coefficient_matrix(mu.mu[t]) - want).cwiseAbs().maxCoeff());
    }
    return below(worst, 1e-12, "max |A_mu - sqrt(det G) G^-1|");
  });

  suite.check("reparam2d", "energy_matches_resampled_dirichlet", [&] {
    const auto mesh = build_disk_mesh(4);
    double worst = 0.0;
    double identity = 0.0;
    for (const char* id : {"stretch:2,1", "graph:sin:0.3"}) {
      const SurfaceMap u = make_builtin_surface(id);
      const SurfaceSample s = sample_surface(mesh, u);
      identity = std::max(identity, std::abs(energy_of_reparam(s, DiskDiffeo::identity(
                                                                      mesh, BoundaryPolicy::three_point())) -
                                             dirichlet_energy(s)) /
                                        dirichlet_energy(s));
      for (int k = 0; k < 20; ++k) {
        const DiskDiffeo phi = random_diffeo(mesh, BoundaryPolicy::three_point(), 0.05,
                                             suite.seed() + 50 + k);
        const double e = energy_of_reparam(s, phi);
        const double d = dirichlet_energy(pullback(u, phi));
        worst = std::max(worst, std::abs(e - d) / d);
      }
    }
    suite.touch({"energy_of_reparam"});
    return Outcome{worst, 3e-2, worst < 3e-2 && identity < 1e-12,
                   fmt("identity map vs Dirichlet %.3g", identity)};
  });

  suite.check("reparam2d", "area_bounds_every_reparameterization", [&] {
    const auto mesh = build_disk_mesh(4);
    double worst = -std::numeric_limits<double>::infinity();
    for (const char* id : kCorpus) {
      const SurfaceSample s = sample_surface(mesh, make_builtin_surface(id));
      const double a = area_functional(s);
      for (int k = 0; k < 10; ++k) {
        const DiskDiffeo phi = random_diffeo(mesh, BoundaryPolicy::three_point(), 0.1,
                                             suite.seed() + 80 + k);
        worst = std::max(worst, (a - energy_of_reparam(s, phi)) / a);
      }
      const DiskDiffeo lbs = linear_beltrami_solve(mesh, beltrami_coefficient(s),
                                                   BoundaryPolicy::three_point());
      worst = std::max(worst, (a - energy_of_reparam(s, lbs)) / a);
    }
    suite.touch({"linear_beltrami_solve"});
    return below(worst, 1e-12, "max (A - E(phi)) / A");
  });

  suite.check("reparam2d", "descent_monotone_and_approaches_area", [&] {
    const auto mesh = build_disk_mesh(3);
    int increases = 0;
    double worst_gap_ratio = 0.0;
    int defect_up = 0;
    for (const char* id : {"stretch:2,1", "graph:sin:0.3"}) {
      const SurfaceSample s = sample_surface(mesh, make_builtin_surface(id));
      const double a = area_functional(s);
      const DiskDiffeo phi0 = DiskDiffeo::identity(mesh, BoundaryPolicy::three_point());
      for (StepPolicy policy : {StepPolicy::lbfgs, StepPolicy::steepest}) {
        DescentOptions options;
        options.policy = policy;
        const DescentResult r = inner_variation_descent(s, phi0, 300, options);
        for (std::size_t i = 1; i < r.history.size(); ++i) {
          if (r.history[i] > r.history[i - 1]) ++increases;
        }
        r.phi.validate();
        worst_gap_ratio = std::max(worst_gap_ratio, (r.history.back() - a) / (r.history.front() - a));
        if (!(conformality_defect(s, r.phi) < conformality_defect(s, phi0))) ++defect_up;
      }
    }
    suite.touch({"inner_variation_descent", "conformality_defect"});
    return Outcome{static_cast<double>(increases), 1.0, increases == 0 && defect_up == 0 &&
                                                         worst_gap_ratio < 0.5,
                   fmt("worst final/initial gap %.3g; %g runs without defect decrease",
                       worst_gap_ratio, defect_up)};
  });

  suite.check("reparam2d", "conformality_defect_examples", [&] {
    const auto mesh = build_disk_mesh(3);
    const DiskDiffeo id = DiskDiffeo::identity(mesh, BoundaryPolicy::three_point());
    const double flat = conformality_defect(sample_surface(mesh, make_builtin_surface("flat")), id);
    const double stretch =
        conformality_defect(sample_surface(mesh, make_builtin_surface("stretch:2,1")), id);
    const double err = std::max(flat, std::abs(stretch - 0.3 * std::sqrt(2.0)));
    return below(err, 1e-14, "flat identity 0, stretch(2,1) identity 0.3 sqrt 2");
  });

  suite.check("reparam2d", "beltrami_solve_zero_mu_is_identity", [&] {
    double disp = 0.0;
    double residual = 0.0;
    for (int level : {3, 4}) {
      const auto mesh = build_disk_mesh(level);
      const BeltramiField zero = BeltramiField::constant(mesh->triangle_count(), 0.0);
      const DiskDiffeo phi = linear_beltrami_solve(mesh, zero, BoundaryPolicy::three_point());
      for (int v = 0; v < mesh->vertex_count(); ++v) {
        disp = std::max(disp, (phi.positions()[v] - mesh->vertices[v]).norm());
      }
      residual = std::max(residual, beltrami_residual(phi, zero));
    }
    return Outcome{disp, 1e-8, disp < 1e-8 && residual < 1e-6,
                   fmt("Beltrami residual %.3g", residual)};
  });

  // For the metric of a piecewise-linear map Psi of the disk onto itself the
  // discrete Beltrami equation has the exact solution Psi.
  suite.check("reparam2d", "beltrami_solve_recovers_pl_map", [&] {
    const auto mesh = build_disk_mesh(4);
    double disp = 0.0;
    double residual = 0.0;
    for (int k = 0; k < 3; ++k) {
      const DiskDiffeo psi = random_diffeo(mesh, BoundaryPolicy::three_point(), 0.1,
                                           suite.seed() + 90 + k);
      std::vector<Vec3> values;
      for (const auto& p : psi.positions()) values.emplace_back(p.x(), p.y(), 0.0);
      const SurfaceSample s = surface_from_values(mesh, values);
      const BeltramiField mu = beltrami_coefficient(s);
      const DiskDiffeo phi = linear_beltrami_solve(mesh, mu, BoundaryPolicy::three_point());
      for (int v = 0; v < mesh->vertex_count(); ++v) {
        disp = std::max(disp, (phi.positions()[v] - psi.positions()[v]).norm());
      }
      residual = std::max(residual, beltrami_residual(phi, mu));
    }
    return Outcome{residual, 1e-6, residual < 1e-6 && disp < 1e-8,
                   fmt("max vertex distance to Psi %.3g", disp)};
  });

  // A nonzero constant mu has no exact piecewise-linear solution that maps
  // the circle to itself; the residual must shrink under refinement.
  suite.check("reparam2d", "beltrami_residual_decays_for_constant_mu", [&] {
    std::vector<double> residuals;
    for (int level : {3, 4, 5}) {
      const auto mesh = build_disk_mesh(level);
      const BeltramiField mu = BeltramiField::constant(mesh->triangle_count(), 1.0 / 3.0);
      residuals.push_back(beltrami_residual(
          linear_beltrami_solve(mesh, mu, BoundaryPolicy::three_point()), mu));
    }
    const double ratio = std::max(residuals[1] / residuals[0], residuals[2] / residuals[1]);
    return below(ratio, 0.75, fmt("residual at levels 3 and 5: %.3g, %.3g", residuals[0], residuals[2]));
  });

  suite.check("reparam2d", "beltrami_and_descent_agree", [&] {
    const auto mesh = build_disk_mesh(3);
    double worst = 0.0;
    for (const char* id : {"stretch:2,1", "graph:sin:0.3"}) {
      const SurfaceSample s = sample_surface(mesh, make_builtin_surface(id));
      const double e_lbs = energy_of_reparam(
          s, linear_beltrami_solve(mesh, beltrami_coefficient(s), BoundaryPolicy::three_point()));
      const double e_desc =
          inner_variation_descent(s, DiskDiffeo::identity(mesh, BoundaryPolicy::three_point()), 2000)
              .history.back();
      worst = std::max(worst, std::abs(e_lbs - e_desc) / e_desc);
    }
    return below(worst, 1e-2, "max relative energy difference, level 3");
  });

  suite.check("reparam2d", "random_diffeo_valid_and_deterministic", [&] {
    const auto mesh = build_disk_mesh(3);
    int bad = 0;
    for (int k = 0; k < 10; ++k) {
      const DiskDiffeo a = random_diffeo(mesh, BoundaryPolicy::three_point(), 0.2, suite.seed() + k);
      const DiskDiffeo b = random_diffeo(mesh, BoundaryPolicy::three_point(), 0.2, suite.seed() + k);
      a.validate();
      if (a.positions() != b.positions() || a.angles() != b.angles()) ++bad;
      for (int slot : a.marked()) {
        if (a.angles()[slot] != mesh->boundary_angle[slot]) ++bad;
      }
      const DiskDiffeo fixed = random_diffeo(mesh, BoundaryPolicy::fixed_boundary(), 0.2, suite.seed() + k);
      fixed.validate();
      if (fixed.angles() != mesh->boundary_angle) ++bad;
    }
    return below(bad, 1, "count of non-deterministic maps or moved pinned angles");
  });
}

// ---------------------------------------------------------------------- cli

void cli_properties(Suite& suite) {
  suite.check("cli", "reports_deterministic", [&] {
    RunConfig h;
    h.command = Command::hull1d;
    h.n = 256;
    h.seed = suite.seed();
    RunConfig p;
    p.command = Command::pointwise;
    p.density = "wn:2";
    p.matrix = "1,0.2;0.3,1;0.5,-0.4";
    p.seed = suite.seed();
    RunConfig s;
    s.command = Command::surface;
    s.surface = "graph:sin:0.3";
    s.levels = 2;
    s.iters = 50;
    s.seed = suite.seed();
    int differ = 0;
    for (const RunConfig& cfg : {h, p, s}) {
      if (run(cfg).to_json() != run(cfg).to_json()) ++differ;
    }
    suite.touch({"run_hull1d"});
    return below(differ, 1, "commands whose two reports differ");
  });

  suite.check("cli", "hull1d_report_examples", [&] {
    RunConfig cfg;
    cfg.command = Command::hull1d;
    cfg.n = 4096;
    cfg.seed = suite.seed();
    const Json quad = run_hull1d(cfg).data["result"];
    // Parabola length: sqrt 5 / 2 + asinh(2) / 4.
    const double len = std::sqrt(5.0) / 2.0 + std::asinh(2.0) / 4.0;
    const double err = std::abs(quad["I_i"].get<double>() - 0.5 * len * len);
    cfg.density = "norm";
    const Json norm = run_hull1d(cfg).data["result"];
    cfg.density = "power:0.5";
    cfg.n = 512;
    const Json half = run_hull1d(cfg).data["result"];
    const bool ok = quad["status"] == "closed_form" && norm["status"] == "degree_one_invariant" &&
                    norm["I_i"] == norm["I"] && half["status"] == "trivial_zero" &&
                    half["probe"].size() == 50;
    return Outcome{err, 1e-5, ok && err < 1e-5, "parabola I_i vs closed form; statuses"};
  });

  suite.check("cli", "svg_polyline", [&] {
    auto points = [](const std::string& svg) {
      std::vector<std::pair<double, double>> out;
      const auto at = svg.find("points=\"");
      const auto end = svg.find('"', at + 8);
      std::string body = svg.substr(at + 8, end - at - 8);
      std::replace(body.begin(), body.end(), ',', ' ');
      std::istringstream in(body);
      double x = 0.0;
      double y = 0.0;
      while (in >> x >> y) out.emplace_back(x, y);
      return out;
    };
    int bad = 0;
    const auto flat = points(render_svg(std::vector<double>(5, 2.5)));
    for (const auto& [x, y] : flat) bad += y != flat.front().second;
    const auto mesh = build_disk_mesh(2);
    const SurfaceSample s = sample_surface(mesh, make_builtin_surface("stretch:2,1"));
    const auto history =
        inner_variation_descent(s, DiskDiffeo::identity(mesh, BoundaryPolicy::three_point()), 40).history;
    const auto desc = points(render_svg(history));
    if (desc.size() != history.size()) ++bad;
    // SVG y grows downward: a non-increasing history never moves up.
    for (std::size_t i = 1; i < desc.size(); ++i) bad += desc[i].second < desc[i - 1].second;
    try {
      emit_svg({}, "unused.svg");
      ++bad;
    } catch (const UsageError&) {
    }
    try {
      emit_svg(history, "/nonexistent-dir/x/plot.svg");
      ++bad;
    } catch (const IoError&) {
    }
    const auto path = std::filesystem::temp_directory_path() /
                      ("invhull_verify_" + std::to_string(suite.seed()) + ".svg");
    emit_svg(history, path.string());
    if (!std::filesystem::exists(path)) ++bad;
    std::filesystem::remove(path);
    suite.touch({"emit_svg"});
    return below(bad, 1, "malformed plots or missing errors");
  });
}

}  // namespace

Report run_verify(const RunConfig& cfg) {
  cfg.validate();
  Suite suite(cfg.seed);
  suite.touch({"run_verify"});
  densities(suite);
  hull1d(suite);
  pointwise(suite);
  disk_mesh(suite);
  reparam2d(suite);
  cli_properties(suite);
  suite.check("cli", "coverage_of_public_operations", [&] {
    return Outcome{suite.all_covered() ? 0.0 : 1.0, 1.0, suite.all_covered(),
                   "every public operation exercised"};
  });

  Report report;
  report.data["tool"] = "invhull";
  report.data["version"] = version();
  report.data["command"] = to_string(cfg.command);
  report.data["config"] = {{"seed", cfg.seed}};
  report.data["properties"] = suite.properties();
  report.data["coverage"] = suite.coverage();
  const int total = static_cast<int>(suite.properties().size());
  report.data["summary"] = {{"total", total}, {"passed", total - suite.failed()},
                            {"failed", suite.failed()}};
  report.failed = suite.failed() > 0;
  return report;
}

}  // namespace invhull::cli
