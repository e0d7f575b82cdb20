#include "invhull/curve.hpp"
#include "invhull/density.hpp"
#include "invhull/errors.hpp"
#include "invhull/hull1d.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>

using namespace invhull;
using oracle::vec3;

TEST_CASE("evaluate_functional_1d examples") {
  const Density q = make_density("quadratic");
  CHECK(std::abs(evaluate_functional_1d(q, make_builtin_curve("line:1,1,0", 1024)) - 1.0) < 1e-9);
  CHECK(std::abs(evaluate_functional_1d(q, make_builtin_curve("parabola", 1024)) - 7.0 / 6.0) < 1e-6);
  CHECK(std::abs(evaluate_functional_1d(make_density("norm"), make_builtin_curve("line:3,4,0", 1024)) - 5.0) < 1e-9);
}

TEST_CASE("degenerate curves are rejected") {
  const SampledCurve c = make_builtin_curve("line:0,0,0", 64);
  CHECK(c.degenerate());
  CHECK_THROWS_AS(evaluate_functional_1d(make_density("quadratic"), c), RegularityError);
}

TEST_CASE("invert_g examples") {
  const Density q = make_density("quadratic");
  CHECK(invert_g(q, -0.5, vec3(1, 0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(invert_g(q, -2.0, vec3(2, 0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(invert_g(make_density("ppower:3"), -2.0 / 3.0, vec3(1, 0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("invert_g errors") {
  CHECK_THROWS_AS(invert_g(make_density("power:0.5"), -0.1, vec3(1, 0, 0)), ConvexityError);
  // g < 0 for the quadratic density, so a positive c is out of range.
  CHECK_THROWS_AS(invert_g(make_density("quadratic"), 0.5, vec3(1, 0, 0)), NoRootError);
}

TEST_CASE("solve_c examples") {
  const Density q = make_density("quadratic");
  CHECK(solve_c(q, make_builtin_curve("line:2,0,0", 512)) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(solve_c(q, make_builtin_curve("line:1,0,0", 512)) == doctest::Approx(-0.5).epsilon(1e-9));
  const double len = oracle::parabola_length();
  CHECK(solve_c(q, make_builtin_curve("parabola", 4096)) == doctest::Approx(-0.5 * len * len).epsilon(1e-6));
}

TEST_CASE("invariant_hull_1d examples") {
  const double len = oracle::parabola_length();
  const HullResult1D q = invariant_hull_1d(make_density("quadratic"), make_builtin_curve("parabola", 4096));
  CHECK(q.status == HullStatus::closed_form);
  CHECK(q.value == doctest::Approx(0.5 * len * len).epsilon(1e-6));
  CHECK(q.value == doctest::Approx(1.09364).epsilon(1e-5));
  CHECK(std::abs(q.normalization_residual) < 1e-9);

  const SampledCurve helix = make_builtin_curve("helix", 512);
  const HullResult1D n = invariant_hull_1d(make_density("norm"), helix);
  CHECK(n.status == HullStatus::degree_one_invariant);
  CHECK(n.value == n.functional);

  const HullResult1D p3 = invariant_hull_1d(make_density("ppower:3"), make_builtin_curve("line:1,1,0", 256));
  CHECK(p3.value == doctest::Approx(std::pow(std::sqrt(2.0), 3) / 3.0).epsilon(1e-9));
}

TEST_CASE("hull matches the arc-length formula on random curves") {
  for (int k = 0; k < 5; ++k) {
    const SampledCurve u = random_smooth_curve(kDefaultSeed + k, 4096);
    const double len = oracle::curve_length(u);
    CHECK(invariant_hull_1d(make_density("quadratic"), u).value == doctest::Approx(0.5 * len * len).epsilon(1e-6));
    CHECK(invariant_hull_1d(make_density("ppower:3"), u).value == doctest::Approx(len * len * len / 3).epsilon(1e-6));
  }
}

TEST_CASE("direct minimizer examples") {
  const Density q = make_density("quadratic");
  const auto par = direct_minimize_reparam(q, make_builtin_curve("parabola", 256), 2000, kDefaultSeed);
  CHECK(std::abs(par.value - 1.09364) < 1e-3);
  CHECK(std::abs(par.phi.normalization_defect()) < 1e-9);
  const auto line = direct_minimize_reparam(q, make_builtin_curve("line:1,1,0", 128), 500, kDefaultSeed);
  CHECK(line.value == doctest::Approx(1.0).epsilon(1e-9));
  for (double s : line.phi.slopes) CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
  // The history only records improvements.
  for (std::size_t i = 1; i < par.history.size(); ++i) CHECK(par.history[i] <= par.history[i - 1]);
}

TEST_CASE("direct minimizer drifts to zero for p = 1/2") {
  const Density half = make_density("ppower:0.5");
  const SampledCurve line = make_builtin_curve("line:1,0,0", 1024);
  const double i_u = evaluate_functional_1d(half, line);
  const double short_run = direct_minimize_reparam(half, line, 5, kDefaultSeed).value;
  const double long_run = direct_minimize_reparam(half, line, 2000, kDefaultSeed).value;
  CHECK(long_run < short_run);
  CHECK(long_run < 0.05 * i_u);
  CHECK(invariant_hull_1d(half, line).status == HullStatus::trivial_zero);
}

TEST_CASE("triviality probe examples") {
  const auto p = triviality_probe(make_density("power:0.5"), make_builtin_curve("line:1,0,0", 512), 98);
  CHECK(p[0] == doctest::Approx(2 * std::sqrt(2.0) / 3).epsilon(1e-9));
  CHECK(p[7] == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(p[97] == doctest::Approx(2 * std::sqrt(99.0) / 100).epsilon(1e-9));

  const auto q = triviality_probe(make_density("quadratic"), make_builtin_curve("line:1,0,0", 512), 20);
  for (int j = 1; j <= 20; ++j) {
    CHECK(q[j - 1] == doctest::Approx((j + 1.0) * (j + 1.0) / (2 * (2 * j + 1.0))).epsilon(1e-8));
    if (j > 1) CHECK(q[j - 1] > q[j - 2]);
  }
  const SampledCurve helix = make_builtin_curve("helix", 256);
  const double len = std::sqrt(4 * oracle::kPi * oracle::kPi + 1);
  for (double v : triviality_probe(make_density("norm"), helix, 10)) CHECK(v == doctest::Approx(len).epsilon(1e-8));
}

TEST_CASE("Euler-Lagrange first integral is constant at the optimum") {
  const SampledCurve u = random_smooth_curve(kDefaultSeed + 77, 1024);
  for (const char* id : {"quadratic", "ppower:3", "ppower:1.5"}) {
    CHECK(invariant_hull_1d(make_density(id), u).el_stdev < 1e-6);
  }
}

TEST_CASE("reparameterization slopes") {
  const Reparam1D r = Reparam1D::from_slopes({1.0, 3.0, 2.0, 2.0});
  CHECK(std::abs(r.normalization_defect()) < 1e-15);
  CHECK(r.values.front() == 0.0);
  CHECK(r.values.back() == doctest::Approx(1.0));
}

TEST_CASE("curve CSV round trip") {
  const auto path = std::filesystem::temp_directory_path() / "invhull_curve_test.csv";
  const SampledCurve u = make_builtin_curve("parabola", 256);
  write_curve_csv(u, path.string());
  const SampledCurve v = read_curve_csv(path.string());
  std::filesystem::remove(path);
  CHECK(v.cells() == 256);
  const Density q = make_density("quadratic");
  CHECK(evaluate_functional_1d(q, v) == doctest::Approx(7.0 / 6.0).epsilon(1e-5));
  CHECK(invariant_hull_1d(q, v).value == doctest::Approx(1.09364).epsilon(1e-4));
  CHECK_THROWS_AS(read_curve_csv("/nonexistent/curve.csv"), IoError);
  CHECK_THROWS_AS(make_builtin_curve("spiral", 8), UsageError);
}
