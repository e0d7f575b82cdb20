#pragma once

#include "invhull/matrix.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace invhull {

using Point = Eigen::VectorXd;
using PathFn = std::function<Point(double)>;

// A path u : [0, 1] -> R^m sampled on a uniform grid t_k = k / n, with
// derivative samples at the cell midpoints.
class SampledCurve {
 public:
  // Samples u on n cells; derivatives come from `du` evaluated at midpoints.
  static SampledCurve from_functions(std::string name, PathFn u, PathFn du,
                                     int n);
  // Grid values only; midpoint derivatives by central differences
  // (u_{k+1} - u_k) / dt. Throws UsageError unless t is uniform on [0, 1].
  static SampledCurve from_samples(std::string name, std::vector<double> t,
                                   std::vector<Point> u);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int cells() const { return static_cast<int>(du_.size()); }
  double dt() const { return 1.0 / cells(); }
  double t(int k) const { return static_cast<double>(k) / cells(); }
  const std::vector<Point>& values() const { return u_; }
  // du_k as m x 1 matrices, ready for densities.
  const std::vector<MatrixF>& derivatives() const { return du_; }

  bool has_analytic_derivative() const { return static_cast<bool>(du_fn_); }
  // u'(s) for any s in [0, 1]: analytic when available, otherwise linear
  // interpolation between midpoint samples (constant beyond the end cells).
  MatrixF derivative_at(double s) const;
  Point value_at(double s) const;

  // Largest sampled speed; the regularity threshold is eps_reg * scale.
  double scale() const { return scale_; }
  bool degenerate() const { return degenerate_; }
  // Throws RegularityError when some |du_k| < eps_reg * scale.
  void require_regular() const;

  // The curve t -> u(psi(t)) for an increasing psi with psi(0)=0, psi(1)=1.
  // Requires analytic u and u'.
  SampledCurve composed(const std::function<double(double)>& psi,
                        const std::function<double(double)>& dpsi, int n) const;

 private:
  SampledCurve() = default;
  void finalize();

  std::string name_;
  int dim_ = 0;
  std::vector<Point> u_;
  std::vector<MatrixF> du_;
  PathFn u_fn_;
  PathFn du_fn_;
  double scale_ = 0.0;
  bool degenerate_ = false;
};

// "line:a,b,c" (u = t (a,b,c)), "parabola" (u = (t^2, t, 0)),
// "helix" (u = (cos 2 pi t, sin 2 pi t, t)). Throws UsageError.
SampledCurve make_builtin_curve(const std::string& spec, int n);

// CSV with header "t,x1,...,xm", one row per grid point.
SampledCurve read_curve_csv(const std::string& path);
void write_curve_csv(const SampledCurve& curve, const std::string& path);

// A smooth regular curve in R^m with u(0) = 0 whose velocity is a constant
// drift plus three random Fourier modes; the drift dominates the modes so
// |u'| >= 0.25 |drift| everywhere.
SampledCurve random_smooth_curve(std::uint64_t seed, int n, int m = 3);

}  // namespace invhull
