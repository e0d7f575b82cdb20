#pragma once

#include <functional>

namespace invhull {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Root of a monotone-increasing f on a sign-changing bracket [lo, hi]
// (f(lo) < 0 < f(hi)). An endpoint value of +-inf ("outside the range") is
// bisected away first; the finite bracket goes to TOMS 748. Stops when
// |f(x)| <= ftol or the bracket is narrower than xtol.
RootResult bracketed_root(const std::function<double(double)>& f, double lo,
                          double hi, double f_lo, double f_hi, double ftol,
                          double xtol, int max_iter = 400);

}  // namespace invhull
