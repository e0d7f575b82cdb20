#pragma once

#include <functional>
#include <vector>

namespace invhull {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule (Newton iteration on P_n).
GaussRule gauss_legendre(int n);

// Composite Gauss-Legendre on [0, 1] with panels graded geometrically toward
// both endpoints (panel widths 2^-k, down to 2^-levels). Suited to integrands
// that concentrate in a boundary layer at either end.
double graded_integral(const std::function<double(double)>& f,
                       int levels = 52, int points = 20);

}  // namespace invhull
