#include "invhull/matrix.hpp"

#include "invhull/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <vector>

namespace invhull {

double determinant(const SquareMat& x) {
  switch (x.rows()) {
    case 1:
      return x(0, 0);
    case 2:
      return x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0);
    case 3:
      return x(0, 0) * (x(1, 1) * x(2, 2) - x(1, 2) * x(2, 1)) -
             x(0, 1) * (x(1, 0) * x(2, 2) - x(1, 2) * x(2, 0)) +
             x(0, 2) * (x(1, 0) * x(2, 1) - x(1, 1) * x(2, 0));
    default:
      return x.determinant();
  }
}

SquareMat adjugate(const SquareMat& x) {
  const int n = static_cast<int>(x.rows());
  SquareMat c(n, n);
  if (n == 1) {
    c(0, 0) = 1.0;
    return c;
  }
  if (n == 2) {
    c << x(1, 1), -x(1, 0), -x(0, 1), x(0, 0);
    return c;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      SquareMat minor(n - 1, n - 1);
      for (int r = 0, mr = 0; r < n; ++r) {
        if (r == i) continue;
        for (int s = 0, ms = 0; s < n; ++s) {
          if (s == j) continue;
          minor(mr, ms++) = x(r, s);
        }
        ++mr;
      }
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      c(i, j) = sign * determinant(minor);
    }
  }
  return c;
}

MatrixX::MatrixX(SquareMat x) : x_(std::move(x)) {
  if (x_.rows() != x_.cols() || x_.rows() < 1 || x_.rows() > kMaxCols) {
    throw UsageError("MatrixX must be square with 1 <= N <= 4");
  }
  det_ = determinant(x_);
  adj_ = adjugate(x_);
}

int rank(const MatrixF& f) {
  if (f.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(f)};
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-12 * smax) ++r;
  }
  return r;
}

bool is_regular(const MatrixF& f) { return rank(f) == f.cols(); }

SquareMat gram(const MatrixF& f) { return f.transpose() * f; }

double volume_density(const MatrixF& f) {
  const double d = determinant(gram(f));
  return d > 0.0 ? std::sqrt(d) : 0.0;
}

MatrixF parse_matrix(const std::string& literal) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(literal);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> values;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw UsageError("malformed matrix literal '" + literal + "'");
      }
      for (std::size_t k = used; k < cell.size(); ++k) {
        if (!std::isspace(static_cast<unsigned char>(cell[k]))) {
          throw UsageError("malformed matrix literal '" + literal + "'");
        }
      }
      if (!std::isfinite(v)) {
        throw UsageError("non-finite entry in matrix literal '" + literal + "'");
      }
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty() || rows.front().empty()) {
    throw UsageError("empty matrix literal");
  }
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != cols) {
      throw UsageError("ragged matrix literal '" + literal + "'");
    }
  }
  if (rows.size() > static_cast<std::size_t>(kMaxRows) ||
      cols > static_cast<std::size_t>(kMaxCols)) {
    throw UsageError("matrix literal exceeds 8x4");
  }
  MatrixF f(static_cast<int>(rows.size()), static_cast<int>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      f(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
  }
  return f;
}

double ExtendedReal::value() const {
  if (infinite_) throw DomainError("ExtendedReal is +infinity");
  return value_;
}

}  // namespace invhull
