#include "invhull/density.hpp"
#include "invhull/errors.hpp"
#include "invhull/pointwise_hull.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace invhull;
using oracle::mat;

TEST_CASE("pointwise hull examples") {
  const Density q = make_density("quadratic");
  const auto e = pointwise_hull(q, mat({{1, 0}, {0, 1}, {0, 0}}));
  REQUIRE(e.value);
  CHECK(*e.value == doctest::Approx(1.0).epsilon(1e-8));

  const MatrixF sheared = mat({{1, 1}, {0, 1}, {0, 0}});
  CHECK(eval_density(q, sheared) == doctest::Approx(1.5));
  CHECK(*pointwise_hull(q, sheared).value == doctest::Approx(oracle::wedge(sheared)).epsilon(1e-8));

  const MatrixF p = mat({{2, 1}, {0, 1}, {0, 0}});
  CHECK(*pointwise_hull(make_density("product"), p).value == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("pointwise hull of W^N equals the volume density") {
  std::mt19937_64 rng(21);
  for (int n : {1, 2, 3}) {
    const Density w = make_density("wn:" + std::to_string(n));
    for (int k = 0; k < 10; ++k) {
      const MatrixF f = oracle::random_regular(rng, n + 1, n);
      const auto h = pointwise_hull(w, f, 12, kDefaultSeed + k);
      REQUIRE(h.value);
      CHECK(std::abs(*h.value - oracle::volume(f)) < 1e-6 * (1 + oracle::volume(f)));
      CHECK(*h.value <= eval_density(w, f) + 1e-8);
      CHECK(h.argmin_x.det() > 0.0);
      CHECK(h.spread >= 0.0);
    }
  }
}

TEST_CASE("pointwise hull with a free scale coordinate") {
  // The quadratic density at N = 3 is homogeneous of degree 2, not 3: the
  // scale search drives det X -> 0 and the hull is unbounded below.
  std::mt19937_64 rng(23);
  const MatrixF f = oracle::random_regular(rng, 4, 3);
  const auto h = pointwise_hull(make_density("quadratic"), f);
  CHECK(h.unbounded_below);
  CHECK_FALSE(h.value.has_value());
}

TEST_CASE("pointwise hull rejects rank-deficient F") {
  CHECK_THROWS_AS(pointwise_hull(make_density("wn:2"), mat({{1, 2}, {2, 4}, {0, 0}})), RegularityError);
}

TEST_CASE("pointwise hull is deterministic for a seed") {
  std::mt19937_64 rng(29);
  const MatrixF f = oracle::random_regular(rng, 3, 2);
  const auto a = pointwise_hull(make_density("product"), f, 8, 5);
  const auto b = pointwise_hull(make_density("product"), f, 8, 5);
  CHECK(a.start_values == b.start_values);
}

TEST_CASE("volume density examples") {
  CHECK(volume_density(mat({{1, 0}, {0, 1}, {0, 0}})) == doctest::Approx(1.0));
  CHECK(volume_density(mat({{2, 0}, {0, 1}, {0, 0}})) == doctest::Approx(2.0));
  CHECK(volume_density(mat({{1, 2}, {1, 2}, {1, 2}})) == 0.0);
  std::mt19937_64 rng(31);
  for (int k = 0; k < 10; ++k) {
    const MatrixF f = oracle::random_regular(rng, 4, 3);
    CHECK(volume_density(f) == doctest::Approx(oracle::volume(f)).epsilon(1e-12));
  }
}

TEST_CASE("closed-form optimal X") {
  const MatrixF e = mat({{1, 0}, {0, 1}, {0, 0}});
  const MatrixX x = optimal_X_closed_form(e);
  CHECK(wbar(make_density("wn:2"), x, e).value() == doctest::Approx(1.0));

  const MatrixF f = mat({{2, 0}, {0, 1}, {0, 0}});
  const MatrixX y = optimal_X_closed_form(f);
  const Density w2 = make_density("wn:2");
  CHECK(wbar(w2, y, f).value() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(eval_density(w2, f) == doctest::Approx(2.5));
  CHECK(wbar(w2, SquareMat(5 * y.matrix()), f).value() == doctest::Approx(2.0).epsilon(1e-10));

  std::mt19937_64 rng(37);
  for (int n : {2, 3}) {
    for (int k = 0; k < 10; ++k) {
      const MatrixF g = oracle::random_regular(rng, n + 1, n);
      const MatrixX z = optimal_X_closed_form(g);
      const SquareMat m = z.adj() * gram(g) * z.adj().transpose();
      const double lambda = m.trace() / n;
      CHECK((m - lambda * SquareMat::Identity(n, n)).norm() < 1e-10 * lambda);
      CHECK(wbar(make_density("wn:" + std::to_string(n)), z, g).value() ==
            doctest::Approx(oracle::volume(g)).epsilon(1e-8));
    }
  }
}

TEST_CASE("closed-form X rejects ill-conditioned metrics") {
  CHECK_THROWS_AS(optimal_X_closed_form(mat({{1, 0}, {0, 1e-7}, {0, 0}})), ConditioningError);
  CHECK_THROWS_AS(optimal_X_closed_form(mat({{1, 2}, {2, 4}, {0, 0}})), RegularityError);
}

TEST_CASE("criticality residual examples") {
  const MatrixX id{SquareMat::Identity(2, 2)};
  CHECK(criticality_residual(mat({{2, 0}, {0, 1}, {0, 0}}), id) > 0.1);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(criticality_residual(mat({{s, 0}, {s, 0}, {0, 1}}), id) < 1e-10);
  std::mt19937_64 rng(41);
  const MatrixF f = oracle::random_regular(rng, 4, 3);
  CHECK(criticality_residual(f, optimal_X_closed_form(f)) < 1e-8);
}

TEST_CASE("adjugate inversion") {
  std::mt19937_64 rng(43);
  for (int n : {2, 3}) {
    SquareMat x = oracle::random_regular(rng, n, n);
    if (determinant(x) < 0) x.col(0) *= -1;
    CHECK((from_adjugate(adjugate(x)) - x).norm() < 1e-10 * x.norm());
  }
}
