#pragma once

#include <Eigen/Core>

#include <functional>

namespace invhull {

struct NelderMeadOptions {
  double initial_step = 0.2;
  // Terminate when max_i |x_i - x_best| < diameter_tol ...
  double diameter_tol = 1e-10;
  // ... or after this many iterations.
  int max_iters = 2000;
  // Applied to every new vertex (e.g. a normalization onto a slice).
  std::function<void(Eigen::VectorXd&)> project;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex minimization. The objective may return +inf for
// infeasible points; those vertices are always ranked worst.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             Eigen::VectorXd x0, const NelderMeadOptions& options = {});

}  // namespace invhull
