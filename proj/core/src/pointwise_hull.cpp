#include "invhull/pointwise_hull.hpp"

#include "invhull/errors.hpp"
#include "invhull/nelder_mead.hpp"
#include "invhull/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace invhull {

bool GramMatrix::is_positive_definite() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(g)};
  const auto& ev = eig.eigenvalues();
  return ev.size() > 0 && ev(0) > 1e-12 * std::max(1.0, ev(ev.size() - 1));
}

namespace {

constexpr double kScaleBound = 20.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct SearchSpace {
  int n;
  bool homogeneous;  // degree N: search on det X = 1

  int params() const { return n * n + (homogeneous ? 0 : 1); }

  SquareMat unit_matrix(const Eigen::VectorXd& p) const {
    SquareMat x(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) x(i, j) = p(i * n + j);
    }
    return x;
  }

  double log_scale(const Eigen::VectorXd& p) const {
    return homogeneous ? 0.0 : p(n * n);
  }

  SquareMat matrix(const Eigen::VectorXd& p) const {
    return std::exp(log_scale(p)) * unit_matrix(p);
  }

  // X <- X / det(X)^{1/N} on the matrix block; scale clamped to its bounds.
  void normalize(Eigen::VectorXd& p) const {
    const SquareMat x = unit_matrix(p);
    const double d = determinant(x);
    if (d > 0.0) {
      const double s = std::pow(d, -1.0 / n);
      for (int k = 0; k < n * n; ++k) p(k) *= s;
    }
    if (!homogeneous) p(n * n) = std::clamp(p(n * n), -kScaleBound, kScaleBound);
  }
};

}  // namespace

PointwiseHullResult pointwise_hull(const Density& w, const MatrixF& f,
                                   const PointwiseHullOptions& options) {
  w.check_dims(f);
  const int n = static_cast<int>(f.cols());
  if (n < 1 || n > 3) throw UsageError("pointwise_hull: N must be 1, 2 or 3");
  if (!is_regular(f)) throw RegularityError("pointwise_hull: F is not of rank N");
  if (options.starts < 1) throw UsageError("pointwise_hull: need at least one start");

  const auto degree = w.degree(n);
  const SearchSpace space{n, degree && std::abs(*degree - n) < 1e-12};

  auto objective = [&](const Eigen::VectorXd& p) {
    const ExtendedReal v = wbar(w, space.matrix(p), f);
    return v.is_infinite() ? kInf : v.value();
  };

  // Starting points are drawn up front so results do not depend on threads.
  constexpr double kRadii[] = {0.1, 0.5, 1.0};
  std::mt19937_64 rng(options.seed);
  std::vector<Eigen::VectorXd> starts;
  for (int s = 0; s < options.starts; ++s) {
    std::uniform_real_distribution<double> unit(-kRadii[s % 3], kRadii[s % 3]);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(space.params());
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) p(i * n + j) = (i == j ? 1.0 : 0.0) + unit(rng);
      }
      if (determinant(space.unit_matrix(p)) > 0.0) break;
    }
    if (determinant(space.unit_matrix(p)) <= 0.0) {
      for (int i = 0; i < n; ++i) p(i * n + i) = 1.0;
    }
    space.normalize(p);
    starts.push_back(p);
  }

  NelderMeadOptions nm;
  nm.max_iters = options.max_iters;
  nm.diameter_tol = options.diameter_tol;
  nm.project = [&](Eigen::VectorXd& p) { space.normalize(p); };

  std::vector<NelderMeadResult> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    NelderMeadResult best = nelder_mead(objective, starts[s], nm);
    for (int r = 0; r < options.restarts; ++r) {
      NelderMeadOptions again = nm;
      again.initial_step = 0.05;
      NelderMeadResult next = nelder_mead(objective, best.x, again);
      const bool improved = next.fx < best.fx - 1e-15 * (1.0 + std::abs(best.fx));
      if (next.fx < best.fx) best = next;
      if (!improved) break;
    }
    runs[s] = best;
  });

  PointwiseHullResult result;
  result.n_starts = static_cast<int>(starts.size());
  double lo = kInf;
  double hi = -kInf;
  int best = -1;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    const double v = runs[s].fx;
    result.start_values.push_back(v);
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (best < 0 || v < runs[best].fx) best = static_cast<int>(s);
  }
  if (best < 0) {
    result.unbounded_below = true;
    return result;
  }
  result.spread = hi - lo;
  const Eigen::VectorXd& p = runs[best].x;
  result.argmin_x = MatrixX(space.matrix(p));

  const SquareMat unit = space.unit_matrix(p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(unit)};
  const auto& sv = svd.singularValues();
  const bool collapsed = sv(sv.size() - 1) < 1e-12 * sv(0);
  bool at_scale_bound = false;
  if (!space.homogeneous) {
    const double sigma = space.log_scale(p);
    if (std::abs(sigma) > kScaleBound - 1e-3) {
      Eigen::VectorXd inward = p;
      inward(n * n) -= std::copysign(1.0, sigma);
      at_scale_bound = runs[best].fx < objective(inward);
    }
  }
  if (collapsed || at_scale_bound) {
    result.unbounded_below = true;
    return result;
  }
  result.value = runs[best].fx;
  return result;
}

PointwiseHullResult pointwise_hull(const Density& w, const MatrixF& f, int starts,
                                   std::uint64_t seed) {
  PointwiseHullOptions options;
  options.starts = starts;
  options.seed = seed;
  return pointwise_hull(w, f, options);
}

SquareMat from_adjugate(const SquareMat& c) {
  const int n = static_cast<int>(c.rows());
  const double dc = determinant(c);
  if (!(dc > 0.0)) throw DomainError("from_adjugate: det must be positive");
  if (n == 1) return SquareMat::Constant(1, 1, 1.0);  // adj of any 1x1 is 1
  // adj(adj X) = det(X)^{N-2} X and det(adj X) = det(X)^{N-1} > 0.
  const double det_x = std::pow(dc, 1.0 / (n - 1));
  return adjugate(c) / std::pow(det_x, n - 2);
}

MatrixX optimal_X_closed_form(const MatrixF& f) {
  const int n = static_cast<int>(f.cols());
  if (n < 2 || n > 3) throw UsageError("optimal_X_closed_form: N must be 2 or 3");
  if (!is_regular(f)) throw RegularityError("optimal_X_closed_form: F is not of rank N");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(gram(f)));
  const Eigen::VectorXd ev = eig.eigenvalues();
  if (!(ev(0) > 0.0) || ev(n - 1) / ev(0) > 1e12) {
    throw ConditioningError("optimal_X_closed_form: cond(F^T F) exceeds 1e12");
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  // adj X = G^{-1/2}, scaled so that det(adj X) = 1, hence det X = 1.
  Eigen::VectorXd inv_sqrt = ev.cwiseSqrt().cwiseInverse();
  const double normalizer = std::pow(inv_sqrt.prod(), -1.0 / n);
  const SquareMat c = normalizer * (v * inv_sqrt.asDiagonal() * v.transpose());
  return MatrixX(from_adjugate(c));
}

double criticality_residual(const MatrixF& f, const MatrixX& x) {
  if (!x.positive()) throw DomainError("criticality_residual: det X must be positive");
  const int n = x.dim();
  const SquareMat xinv = x.adj().transpose() / x.det();
  const MatrixF a = f * xinv;
  const SquareMat first = (x.det() * x.det() * a.squaredNorm()) * x.adj();
  const SquareMat second =
      static_cast<double>(n) * x.adj() * x.adj() * gram(f) * x.adj().transpose();
  const double scale = first.norm();
  if (scale == 0.0) return 0.0;
  return (first - second).norm() / scale;
}

}  // namespace invhull
