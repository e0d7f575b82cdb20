#include "invhull/roots.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>

namespace invhull {

RootResult bracketed_root(const std::function<double(double)>& f, double lo,
                          double hi, double f_lo, double f_hi, double ftol,
                          double xtol, int max_iter) {
  if (std::abs(f_lo) <= ftol) return {lo, f_lo, 0, true};
  if (std::abs(f_hi) <= ftol) return {hi, f_hi, 0, true};

  RootResult out;
  int it = 0;
  // Bisect while an endpoint is outside the range of f.
  while (!(std::isfinite(f_lo) && std::isfinite(f_hi))) {
    if (++it > max_iter) return out;
    const double x = 0.5 * (lo + hi);
    const double fx = f(x);
    out = {x, fx, it, false};
    if (std::abs(fx) <= ftol) {
      out.converged = true;
      return out;
    }
    if (fx < 0.0) {
      lo = x;
      f_lo = fx;
    } else {
      hi = x;
      f_hi = fx;
    }
    if (hi - lo <= xtol) {
      out.converged = true;
      return out;
    }
  }

  // TOMS 748 on the finite bracket. It stops on an exact zero, so values
  // within ftol are reported as zero.
  double x_last = lo;
  double f_last = f_lo;
  auto g = [&](double x) {
    const double fx = f(x);
    x_last = x;
    f_last = fx;
    return std::abs(fx) <= ftol ? 0.0 : fx;
  };
  auto narrow = [&](double a, double b) { return std::abs(b - a) <= xtol; };
  std::uintmax_t budget = static_cast<std::uintmax_t>(std::max(1, max_iter - it));
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, f_lo, f_hi, narrow, budget);
  it += static_cast<int>(budget);
  if (std::abs(f_last) <= ftol) return {x_last, f_last, it, true};
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  return {x, fx, it + 1, std::abs(fx) <= ftol || std::abs(b - a) <= xtol};
}

}  // namespace invhull
