#include "invhull/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace invhull {

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double graded_integral(const std::function<double(double)>& f, int levels,
                       int points) {
  const GaussRule rule = gauss_legendre(points);
  auto panel = [&](double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < points; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * s;
  };
  // [0, 1/4] graded toward 0, [1/4, 3/4] in two panels, [3/4, 1] toward 1.
  double total = panel(0.25, 0.5) + panel(0.5, 0.75);
  for (int k = 2; k < levels; ++k) {
    const double outer = std::ldexp(1.0, -k);
    const double inner = std::ldexp(1.0, -k - 1);
    total += panel(inner, outer);
    total += panel(1.0 - outer, 1.0 - inner);
  }
  const double last = std::ldexp(1.0, -levels);
  total += panel(0.0, last) + panel(1.0 - last, 1.0);
  return total;
}

}  // namespace invhull
