#pragma once

#include "invhull/matrix.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace invhull {

// Paths and gradients with |x| below kRegularityEpsilon * scale are treated
// as degenerate: the section derivative g and its inverse are undefined at 0.
inline constexpr double kRegularityEpsilon = 1e-8;

// An integrand W on m x N matrices (m-vectors when N = 1).
//
// Densities are shape-polymorphic in m; some fix the domain dimension N
// (W^N, the product density). The homogeneity degree, when declared, is
// either a constant or equal to N (the volume density).
class Density {
 public:
  using EvalFn = std::function<double(const MatrixF&)>;
  using GradFn = std::function<MatrixF(const MatrixF&)>;

  struct Homogeneity {
    double degree = 0.0;
    // When set, the degree equals the column count N of the argument.
    bool equals_domain_dim = false;
  };

  Density(std::string id, EvalFn eval, GradFn grad,
          std::optional<Homogeneity> homogeneity,
          std::optional<int> domain_dim = std::nullopt);

  const std::string& id() const { return id_; }
  std::optional<int> domain_dim() const { return domain_dim_; }
  // Declared degree for arguments with `n_cols` columns, if any.
  std::optional<double> degree(int n_cols) const;
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }

  // Throws UsageError when F does not fit the density.
  void check_dims(const MatrixF& f) const;

  double operator()(const MatrixF& f) const { return eval_(f); }
  // Analytic gradient when available, central differences otherwise.
  MatrixF gradient(const MatrixF& f) const;

 private:
  std::string id_;
  EvalFn eval_;
  GradFn grad_;
  std::optional<Homogeneity> homogeneity_;
  std::optional<int> domain_dim_;
};

// Built-in catalogue, addressable by id and parameter list:
//   norm            |F|                      degree 1
//   quadratic       1/2 |F|^2                degree 2
//   ppower:p        (1/p) |F|^p, p > 0       degree p
//   power:p         |F|^p, p > 0             degree p
//   wn:N            |F|^N / N^{N/2}          degree N, N columns
//   volume          sqrt(det(F^T F))         degree N
//   product         |F_1| |F_2|              degree 2, 2 columns
// Throws UsageError for unknown ids or bad parameters.
Density make_density(std::string_view spec);
std::vector<std::string> builtin_density_examples();

// Central differences with step 1e-6 * max(1, |F|).
MatrixF finite_difference_gradient(const Density& w, const MatrixF& f);

// W(F) after a dimension check.
double eval_density(const Density& w, const MatrixF& f);

// r * W(x / r). Throws DomainError for r <= 0.
double section(const Density& w, const MatrixF& x, double r);

// g(r, x) = W(x/r) - (1/r) grad W(x/r) . x, the r-derivative of the section.
// Throws DomainError for r <= 0 and RegularityError for |x| < eps * scale.
double g_function(const Density& w, double r, const MatrixF& x,
                  double scale = 1.0);

// W-bar(X, F) = det(X) W(F X^{-1}), evaluated as det(X) W(F adj(X)^T / det X);
// tagged +infinity when det X <= 0.
ExtendedReal wbar(const Density& w, const MatrixX& x, const MatrixF& f);
ExtendedReal wbar(const Density& w, const SquareMat& x, const MatrixF& f);

// d W-bar / d X = adj(X) W(A) - det(X) A^T grad W(A) X^{-T}, A = F X^{-1}.
// Requires det X > 0 (DomainError otherwise).
SquareMat wbar_gradient(const Density& w, const SquareMat& x, const MatrixF& f);

struct RadialConvexityReport {
  bool is_strictly_convex = false;
  // Smallest second divided difference of the section over the grid.
  double min_second_difference = 0.0;
};

// Second divided differences of r -> section(W, x, r) on a strictly
// increasing positive grid. Strictly convex iff every consecutive slope
// increase exceeds 1e-9 * (1 + |slopes|). The report is always produced.
RadialConvexityReport radial_convexity_probe(const Density& w,
                                             const MatrixF& x,
                                             std::span<const double> grid);

// Log-spaced grid |x| * 2^k, k = -8..8, used by the 1D engine.
std::vector<double> default_radial_grid(const MatrixF& x);

}  // namespace invhull
