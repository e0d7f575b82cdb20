#pragma once

#include "invhull/density.hpp"
#include "invhull/hull1d.hpp"
#include "invhull/matrix.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace invhull {

// G = F^T F, the metric induced by F. Positive definite iff F is regular.
struct GramMatrix {
  SquareMat g;

  static GramMatrix of(const MatrixF& f) { return {gram(f)}; }
  bool is_positive_definite() const;
};

struct PointwiseHullResult {
  // W_i(F); empty when the search ran off to the scale bound or the
  // det -> 0 boundary (unbounded_below is then set).
  std::optional<double> value;
  MatrixX argmin_x{SquareMat::Identity(1, 1)};
  int n_starts = 0;
  double spread = 0.0;  // max - min of the finite per-start minima
  bool unbounded_below = false;
  std::vector<double> start_values;
};

struct PointwiseHullOptions {
  int starts = 12;
  std::uint64_t seed = kDefaultSeed;
  int max_iters = 2000;
  double diameter_tol = 1e-10;
  // Extra simplex restarts from each start's best point.
  int restarts = 3;
};

// W_i(F) = inf over det X > 0 of det(X) W(F X^{-1}), by multi-start
// Nelder-Mead. For W homogeneous of degree N the search stays on det X = 1;
// otherwise a log-scale coordinate in [-20, 20] is searched jointly.
// Throws RegularityError for rank-deficient F and UsageError unless
// 1 <= N <= 3.
PointwiseHullResult pointwise_hull(const Density& w, const MatrixF& f,
                                   const PointwiseHullOptions& options = {});
PointwiseHullResult pointwise_hull(const Density& w, const MatrixF& f, int starts,
                                   std::uint64_t seed);

// The minimizer of W-bar(W^N, ., F): adj X = G^{-1/2} (scaled to det X = 1),
// X recovered from its adjugate. N in {2, 3}. Throws ConditioningError when
// cond(G) > 1e12 and RegularityError for rank-deficient F.
MatrixX optimal_X_closed_form(const MatrixF& f);

// Relative Frobenius norm of det(X)^2 |A|^2 adj X - N adj X adj X F^T F adj X^T
// (A = F X^{-1}), the stationarity condition of W-bar(W^N, ., F) with the
// common factor |A|^{N-2} removed. Zero exactly at the minimizers.
double criticality_residual(const MatrixF& f, const MatrixX& x);

// Inverse of the adjugate map on det > 0: the X with adjugate(X) = c.
SquareMat from_adjugate(const SquareMat& c);

}  // namespace invhull
