#include "invhull/nelder_mead.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace invhull {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             Eigen::VectorXd x0, const NelderMeadOptions& options) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const int n = static_cast<int>(x0.size());
  auto project = [&](Eigen::VectorXd& x) {
    if (options.project) options.project(x);
  };

  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> val(n + 1);
  project(pts[0]);
  for (int i = 0; i < n; ++i) {
    pts[i + 1](i) += options.initial_step;
    project(pts[i + 1]);
  }
  for (int i = 0; i <= n; ++i) val[i] = f(pts[i]);

  std::vector<int> order(n + 1);
  NelderMeadResult out;
  int it = 0;
  for (; it < options.max_iters; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return val[a] < val[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[n - 1];

    double diameter = 0.0;
    for (int i = 0; i <= n; ++i) {
      diameter = std::max(diameter, (pts[i] - pts[best]).norm());
    }
    if (diameter < options.diameter_tol) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= n;

    Eigen::VectorXd xr = centroid + kReflect * (centroid - pts[worst]);
    project(xr);
    const double fr = f(xr);

    if (fr < val[best]) {
      Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
      project(xe);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    if (fr < val[worst]) {
      Eigen::VectorXd xc = centroid + kContract * (xr - centroid);
      project(xc);
      const double fc = f(xc);
      if (fc <= fr) {
        pts[worst] = xc;
        val[worst] = fc;
        continue;
      }
    } else {
      Eigen::VectorXd xc = centroid + kContract * (pts[worst] - centroid);
      project(xc);
      const double fc = f(xc);
      if (fc < val[worst]) {
        pts[worst] = xc;
        val[worst] = fc;
        continue;
      }
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + kShrink * (pts[i] - pts[best]);
      project(pts[i]);
      val[i] = f(pts[i]);
    }
  }

  const int best = static_cast<int>(std::min_element(val.begin(), val.end()) - val.begin());
  out.x = pts[best];
  out.fx = val[best];
  out.iterations = it;
  return out;
}

}  // namespace invhull
