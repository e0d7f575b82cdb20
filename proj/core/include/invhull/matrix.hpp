#pragma once

#include <Eigen/Core>

#include <string>

namespace invhull {

// Upper bounds on the matrix shapes handled by the library. Fixing them lets
// Eigen keep every F and X on the stack, which matters in the 1D inverter and
// the simplex search where densities are evaluated millions of times.
inline constexpr int kMaxRows = 8;
inline constexpr int kMaxCols = 4;

// An m x N matrix: a gradient of u, or a generic argument F of a density.
// Curves use N = 1, i.e. a column vector.
using MatrixF = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::ColMajor, kMaxRows, kMaxCols>;

// A square N x N matrix: a gradient of a reparameterization, or a generic X.
using SquareMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                Eigen::ColMajor, kMaxCols, kMaxCols>;

double determinant(const SquareMat& x);

// Cofactor matrix, normalized so that adjugate(X) * X^T = det(X) * Identity.
// This is the convention under which X^{-1} = adjugate(X)^T / det(X).
SquareMat adjugate(const SquareMat& x);

// Square matrix with its determinant and adjugate computed once.
class MatrixX {
 public:
  explicit MatrixX(SquareMat x);

  const SquareMat& matrix() const { return x_; }
  int dim() const { return static_cast<int>(x_.rows()); }
  double det() const { return det_; }
  const SquareMat& adj() const { return adj_; }
  // Membership in the set of matrices with positive determinant.
  bool positive() const { return det_ > 0.0; }

 private:
  SquareMat x_;
  double det_;
  SquareMat adj_;
};

// Numerical rank via singular values, relative tolerance 1e-12.
int rank(const MatrixF& f);
// True when rank(F) equals its column count.
bool is_regular(const MatrixF& f);

// Gram matrix F^T F.
SquareMat gram(const MatrixF& f);

// sqrt(det(F^T F)); zero for rank-deficient F.
double volume_density(const MatrixF& f);

// Parses "a,b;c,d;e,f" (rows separated by semicolons). Throws UsageError.
MatrixF parse_matrix(const std::string& literal);

// An extended real used for W-bar: finite values, or a tagged +infinity for
// det X <= 0. Never encoded as a floating-point infinity.
class ExtendedReal {
 public:
  static ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  // Throws DomainError when infinite.
  double value() const;

  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }

 private:
  ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

}  // namespace invhull
