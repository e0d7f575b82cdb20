#pragma once

// Reference values computed without the library's own numerics.

#include "invhull/curve.hpp"
#include "invhull/matrix.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return sum * h / 3.0;
}

inline double curve_length(const invhull::SampledCurve& u) {
  return simpson([&](double t) { return u.derivative_at(t).norm(); }, 0.0, 1.0);
}

// Length of (t^2, t, 0) on [0, 1].
inline double parabola_length() { return std::sqrt(5.0) / 2.0 + std::asinh(2.0) / 4.0; }

// Product of singular values.
inline double volume(const invhull::MatrixF& f) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(f)};
  return svd.singularValues().prod();
}

// |F_1 x F_2| for m = 3, N = 2.
inline double wedge(const invhull::MatrixF& f) {
  const Eigen::Vector3d a = f.col(0);
  const Eigen::Vector3d b = f.col(1);
  return a.cross(b).norm();
}

// Area of the regular n-gon inscribed in the unit circle.
inline double inscribed_polygon_area(int n) { return 0.5 * n * std::sin(2.0 * kPi / n); }

inline invhull::MatrixF random_regular(std::mt19937_64& rng, int m, int n) {
  std::normal_distribution<double> z;
  for (;;) {
    invhull::MatrixF f(m, n);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = z(rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(f)};
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) > 1e-3 * s(0)) return f;
  }
}

inline invhull::MatrixF mat(std::initializer_list<std::initializer_list<double>> rows) {
  invhull::MatrixF f(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) f(i, j++) = v;
    ++i;
  }
  return f;
}

inline invhull::MatrixF vec3(double a, double b, double c) { return mat({{a}, {b}, {c}}); }

}  // namespace oracle
