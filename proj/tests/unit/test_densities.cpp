#include "invhull/density.hpp"
#include "invhull/errors.hpp"
#include "invhull/matrix.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace invhull;
using oracle::mat;
using oracle::vec3;

TEST_CASE("eval_density examples") {
  const MatrixF e = mat({{1, 0}, {0, 1}, {0, 0}});
  CHECK(eval_density(make_density("quadratic"), e) == doctest::Approx(1.0));
  CHECK(eval_density(make_density("wn:2"), e) == doctest::Approx(1.0));
  const MatrixF f = mat({{2, 0}, {0, 1}, {0, 0}});
  CHECK(eval_density(make_density("volume"), f) == doctest::Approx(oracle::volume(f)));
  CHECK(oracle::volume(f) == doctest::Approx(2.0));
}

TEST_CASE("eval_density rejects mismatched dimensions") {
  CHECK_THROWS_AS(eval_density(make_density("wn:3"), mat({{1, 0}, {0, 1}, {0, 0}})), UsageError);
  CHECK_THROWS_AS(eval_density(make_density("product"), vec3(1, 2, 3)), UsageError);
}

TEST_CASE("unknown and malformed density ids") {
  CHECK_THROWS_AS(make_density("bogus"), UsageError);
  CHECK_THROWS_AS(make_density("ppower:-1"), UsageError);
  CHECK_THROWS_AS(make_density("ppower:abc"), UsageError);
  CHECK_THROWS_AS(make_density("wn:0"), UsageError);
}

TEST_CASE("section examples") {
  const Density q = make_density("quadratic");
  CHECK(section(q, vec3(1, 0, 0), 1.0) == doctest::Approx(0.5));
  CHECK(section(q, vec3(1, 0, 0), 2.0) == doctest::Approx(0.25));
  const Density n = make_density("norm");
  for (double r : {0.1, 1.0, 30.0}) CHECK(section(n, vec3(3, 4, 0), r) == doctest::Approx(5.0));
  CHECK_THROWS_AS(section(q, vec3(1, 0, 0), 0.0), DomainError);
  CHECK_THROWS_AS(section(q, vec3(1, 0, 0), -1.0), DomainError);
}

TEST_CASE("g_function examples") {
  CHECK(g_function(make_density("quadratic"), 1.0, vec3(1, 0, 0)) == doctest::Approx(-0.5));
  CHECK(g_function(make_density("ppower:3"), 1.0, vec3(1, 0, 0)) == doctest::Approx(-2.0 / 3.0));
  CHECK(std::abs(g_function(make_density("norm"), 2.5, vec3(1, 2, 0))) < 1e-14);
  CHECK_THROWS_AS(g_function(make_density("quadratic"), 1.0, vec3(0, 0, 0)), RegularityError);
}

TEST_CASE("g_function is the r-derivative of the section") {
  std::mt19937_64 rng(3);
  constexpr double h = 1e-5;
  for (const char* id : {"quadratic", "ppower:3", "ppower:1.5", "norm", "power:0.5"}) {
    const Density w = make_density(id);
    for (int k = 0; k < 10; ++k) {
      const MatrixF x = oracle::random_regular(rng, 3, 1);
      for (double r : {0.5, 1.0, 4.0}) {
        const double fd = (section(w, x, r + h) - section(w, x, r - h)) / (2 * h);
        CHECK(std::abs(g_function(w, r, x) - fd) < 1e-6);
      }
    }
  }
}

TEST_CASE("wbar examples") {
  const Density q = make_density("quadratic");
  const MatrixF f = mat({{1, 0}, {0, 1}, {0, 0}});
  SquareMat x(2, 2);
  x << 2, 0, 0, 0.5;
  CHECK(wbar(q, x, f).value() == doctest::Approx(2.125));
  CHECK(wbar(q, SquareMat::Identity(2, 2), f).value() == doctest::Approx(eval_density(q, f)));
  const Density w2 = make_density("wn:2");
  SquareMat y(2, 2);
  y << 1.2, 0.3, -0.4, 0.9;
  CHECK(wbar(w2, SquareMat(3 * y), f).value() == doctest::Approx(wbar(w2, y, f).value()).epsilon(1e-14));
}

TEST_CASE("wbar is infinite off the positive-determinant set") {
  const Density q = make_density("quadratic");
  SquareMat x(2, 2);
  x << 1, 0, 0, -1;
  CHECK(wbar(q, x, mat({{1, 0}, {0, 1}, {0, 0}})).is_infinite());
  CHECK(wbar(q, SquareMat::Zero(2, 2), mat({{1, 0}, {0, 1}, {0, 0}})).is_infinite());
}

TEST_CASE("wbar gradient matches finite differences") {
  std::mt19937_64 rng(5);
  const Density w = make_density("wn:2");
  for (int k = 0; k < 20; ++k) {
    const MatrixF f = oracle::random_regular(rng, 3, 2);
    SquareMat x = oracle::random_regular(rng, 2, 2);
    if (determinant(x) < 0) x.col(0) *= -1;
    const SquareMat g = wbar_gradient(w, x, f);
    for (int i = 0; i < 4; ++i) {
      SquareMat p = x;
      SquareMat m = x;
      constexpr double h = 1e-6;
      p.data()[i] += h;
      m.data()[i] -= h;
      const double fd = (wbar(w, p, f).value() - wbar(w, m, f).value()) / (2 * h);
      CHECK(g.data()[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("radial convexity probe examples") {
  const MatrixF x = vec3(1, 0, 0);
  CHECK(radial_convexity_probe(make_density("quadratic"), x, default_radial_grid(x)).is_strictly_convex);
  CHECK(radial_convexity_probe(make_density("ppower:3"), x, default_radial_grid(x)).is_strictly_convex);
  CHECK_FALSE(radial_convexity_probe(make_density("norm"), x, default_radial_grid(x)).is_strictly_convex);
  const auto half = radial_convexity_probe(make_density("power:0.5"), x, default_radial_grid(x));
  CHECK_FALSE(half.is_strictly_convex);
  CHECK(half.min_second_difference < 0.0);
  const std::vector<double> bad{1.0, 0.5, 2.0};
  CHECK_FALSE(radial_convexity_probe(make_density("quadratic"), x, bad).is_strictly_convex);
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(7);
  for (const auto& id : builtin_density_examples()) {
    const Density w = make_density(id);
    const int n = w.domain_dim().value_or(2);
    for (int k = 0; k < 25; ++k) {
      const MatrixF f = oracle::random_regular(rng, n + 1, n);
      const MatrixF fd = finite_difference_gradient(w, f);
      CHECK((w.gradient(f) - fd).norm() / fd.norm() < 1e-6);
    }
  }
}

TEST_CASE("declared homogeneity degrees") {
  std::mt19937_64 rng(11);
  for (const auto& id : builtin_density_examples()) {
    const Density w = make_density(id);
    const int n = w.domain_dim().value_or(2);
    const MatrixF f = oracle::random_regular(rng, n + 1, n);
    const auto d = w.degree(n);
    REQUIRE(d.has_value());
    for (double s : {0.5, 2.0, 7.0}) {
      CHECK(eval_density(w, s * f) == doctest::Approx(std::pow(s, *d) * eval_density(w, f)).epsilon(1e-10));
    }
  }
  CHECK(make_density("volume").degree(3) == 3.0);
}

TEST_CASE("adjugate identity") {
  std::mt19937_64 rng(13);
  for (int n = 1; n <= 3; ++n) {
    const SquareMat x = oracle::random_regular(rng, n, n);
    const MatrixX m(x);
    CHECK((m.adj() * x.transpose() - m.det() * SquareMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("matrix literal parsing") {
  const MatrixF f = parse_matrix("1, 2; 3,4 ;5,6");
  CHECK(f.rows() == 3);
  CHECK(f.cols() == 2);
  CHECK(f(2, 1) == 6.0);
  CHECK_THROWS_AS(parse_matrix("1,2;3"), UsageError);
  CHECK_THROWS_AS(parse_matrix("1,x"), UsageError);
  CHECK_THROWS_AS(parse_matrix(""), UsageError);
  CHECK_THROWS_AS(parse_matrix("1,nan"), UsageError);
  CHECK(rank(mat({{1, 2}, {2, 4}, {0, 0}})) == 1);
  CHECK(volume_density(mat({{1, 2}, {2, 4}, {0, 0}})) == 0.0);
}
