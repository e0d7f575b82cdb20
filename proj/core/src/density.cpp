#include "invhull/density.hpp"

#include "invhull/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace invhull {

Density::Density(std::string id, EvalFn eval, GradFn grad,
                 std::optional<Homogeneity> homogeneity,
                 std::optional<int> domain_dim)
    : id_(std::move(id)),
      eval_(std::move(eval)),
      grad_(std::move(grad)),
      homogeneity_(homogeneity),
      domain_dim_(domain_dim) {}

std::optional<double> Density::degree(int n_cols) const {
  if (!homogeneity_) return std::nullopt;
  if (homogeneity_->equals_domain_dim) return static_cast<double>(n_cols);
  return homogeneity_->degree;
}

void Density::check_dims(const MatrixF& f) const {
  if (f.rows() < 1 || f.cols() < 1) {
    throw UsageError("density '" + id_ + "': empty argument");
  }
  if (domain_dim_ && f.cols() != *domain_dim_) {
    throw UsageError("density '" + id_ + "' expects N = " +
                     std::to_string(*domain_dim_) + " columns, got " +
                     std::to_string(f.cols()));
  }
  if (f.rows() < f.cols()) {
    throw UsageError("density '" + id_ + "': argument must have m >= N");
  }
}

MatrixF Density::gradient(const MatrixF& f) const {
  if (grad_) return grad_(f);
  return finite_difference_gradient(*this, f);
}

MatrixF finite_difference_gradient(const Density& w, const MatrixF& f) {
  const double h = 1e-6 * std::max(1.0, f.norm());
  MatrixF g(f.rows(), f.cols());
  MatrixF probe = f;
  for (int j = 0; j < f.cols(); ++j) {
    for (int i = 0; i < f.rows(); ++i) {
      const double saved = probe(i, j);
      probe(i, j) = saved + h;
      const double plus = w(probe);
      probe(i, j) = saved - h;
      const double minus = w(probe);
      probe(i, j) = saved;
      g(i, j) = (plus - minus) / (2.0 * h);
    }
  }
  return g;
}

namespace {

double parse_positive(std::string_view text, std::string_view spec) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v) || v <= 0.0) {
    throw UsageError("density '" + std::string(spec) +
                     "': parameter must be a positive number");
  }
  return v;
}

Density norm_density() {
  return Density(
      "norm", [](const MatrixF& f) { return f.norm(); },
      [](const MatrixF& f) -> MatrixF {
        const double n = f.norm();
        if (n == 0.0) return MatrixF::Zero(f.rows(), f.cols());
        return f / n;
      },
      Density::Homogeneity{1.0, false});
}

Density quadratic_density() {
  return Density(
      "quadratic", [](const MatrixF& f) { return 0.5 * f.squaredNorm(); },
      [](const MatrixF& f) -> MatrixF { return f; },
      Density::Homogeneity{2.0, false});
}

// coeff * |F|^p
Density power_family(std::string id, double p, double coeff) {
  return Density(
      std::move(id),
      [p, coeff](const MatrixF& f) { return coeff * std::pow(f.norm(), p); },
      [p, coeff](const MatrixF& f) -> MatrixF {
        const double n = f.norm();
        if (n == 0.0) return MatrixF::Zero(f.rows(), f.cols());
        return (coeff * p * std::pow(n, p - 2.0)) * f;
      },
      Density::Homogeneity{p, false});
}

Density wn_density(int n) {
  const double c = std::pow(static_cast<double>(n), -0.5 * n);
  return Density(
      "wn:" + std::to_string(n),
      [n, c](const MatrixF& f) { return c * std::pow(f.norm(), n); },
      [n, c](const MatrixF& f) -> MatrixF {
        const double nf = f.norm();
        if (nf == 0.0) return MatrixF::Zero(f.rows(), f.cols());
        return (c * n * std::pow(nf, n - 2)) * f;
      },
      Density::Homogeneity{static_cast<double>(n), false}, n);
}

Density volume() {
  return Density(
      "volume", [](const MatrixF& f) { return volume_density(f); },
      [](const MatrixF& f) -> MatrixF {
        // d sqrt(det G) = sqrt(det G) F G^{-1}
        const SquareMat g = gram(f);
        const double d = determinant(g);
        if (d <= 0.0) return MatrixF::Zero(f.rows(), f.cols());
        const SquareMat ginv = adjugate(g).transpose() / d;
        return std::sqrt(d) * (f * ginv);
      },
      Density::Homogeneity{0.0, true});
}

Density product() {
  return Density(
      "product",
      [](const MatrixF& f) { return f.col(0).norm() * f.col(1).norm(); },
      [](const MatrixF& f) -> MatrixF {
        const double a = f.col(0).norm();
        const double b = f.col(1).norm();
        MatrixF g = MatrixF::Zero(f.rows(), 2);
        if (a > 0.0) g.col(0) = (b / a) * f.col(0);
        if (b > 0.0) g.col(1) = (a / b) * f.col(1);
        return g;
      },
      Density::Homogeneity{2.0, false}, 2);
}

}  // namespace

Density make_density(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string_view param =
      colon == std::string_view::npos ? std::string_view() : spec.substr(colon + 1);
  const bool has_param = colon != std::string_view::npos;

  auto no_param = [&](Density d) {
    if (has_param) {
      throw UsageError("density '" + std::string(name) + "' takes no parameter");
    }
    return d;
  };

  if (name == "norm") return no_param(norm_density());
  if (name == "quadratic") return no_param(quadratic_density());
  if (name == "volume") return no_param(volume());
  if (name == "product") return no_param(product());
  if (name == "ppower" || name == "power") {
    if (!has_param) {
      throw UsageError("density '" + std::string(name) + "' needs an exponent, e.g. " +
                       std::string(name) + ":3");
    }
    const double p = parse_positive(param, spec);
    const std::string id = std::string(name) + ":" + std::string(param);
    return name == "ppower" ? power_family(id, p, 1.0 / p)
                            : power_family(id, p, 1.0);
  }
  if (name == "wn") {
    if (!has_param) throw UsageError("density 'wn' needs N, e.g. wn:2");
    const double n = parse_positive(param, spec);
    if (n != std::floor(n) || n > kMaxCols) {
      throw UsageError("density 'wn': N must be an integer in 1..4");
    }
    return wn_density(static_cast<int>(n));
  }
  throw UsageError("unknown density '" + std::string(spec) + "'");
}

std::vector<std::string> builtin_density_examples() {
  return {"norm", "quadratic", "ppower:3", "power:0.5", "wn:2", "wn:3",
          "volume", "product"};
}

double eval_density(const Density& w, const MatrixF& f) {
  w.check_dims(f);
  return w(f);
}

double section(const Density& w, const MatrixF& x, double r) {
  if (!(r > 0.0)) throw DomainError("section: r must be positive");
  return r * w(x / r);
}

double g_function(const Density& w, double r, const MatrixF& x, double scale) {
  if (!(r > 0.0)) throw DomainError("g_function: r must be positive");
  if (x.norm() < kRegularityEpsilon * scale) {
    throw RegularityError("g_function: degenerate direction |x| < eps_reg");
  }
  const MatrixF y = x / r;
  return w(y) - (w.gradient(y).cwiseProduct(x)).sum() / r;
}

ExtendedReal wbar(const Density& w, const MatrixX& x, const MatrixF& f) {
  if (!x.positive()) return ExtendedReal::infinity();
  if (f.cols() != x.dim()) {
    throw UsageError("wbar: X must be N x N with N = columns of F");
  }
  const MatrixF a = (f * x.adj().transpose()) / x.det();
  return ExtendedReal::finite(x.det() * w(a));
}

ExtendedReal wbar(const Density& w, const SquareMat& x, const MatrixF& f) {
  return wbar(w, MatrixX(x), f);
}

SquareMat wbar_gradient(const Density& w, const SquareMat& x, const MatrixF& f) {
  const MatrixX mx(x);
  if (!mx.positive()) throw DomainError("wbar_gradient: det X must be positive");
  const SquareMat xinv = mx.adj().transpose() / mx.det();
  const MatrixF a = f * xinv;
  const MatrixF ga = w.gradient(a);
  return mx.adj() * w(a) - mx.det() * (a.transpose() * ga) * xinv.transpose();
}

RadialConvexityReport radial_convexity_probe(const Density& w, const MatrixF& x,
                                             std::span<const double> grid) {
  RadialConvexityReport report;
  report.min_second_difference = std::numeric_limits<double>::infinity();
  if (grid.size() < 3) {
    report.is_strictly_convex = false;
    report.min_second_difference = 0.0;
    return report;
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || (k > 0 && !(grid[k] > grid[k - 1]))) {
      report.is_strictly_convex = false;
      report.min_second_difference = 0.0;
      return report;
    }
  }
  std::vector<double> s(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) s[k] = section(w, x, grid[k]);
  std::vector<double> slope(grid.size() - 1);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    slope[k] = (s[k + 1] - s[k]) / (grid[k + 1] - grid[k]);
  }
  bool strict = true;
  for (std::size_t k = 0; k + 1 < slope.size(); ++k) {
    const double rise = slope[k + 1] - slope[k];
    // Rounding in the slopes is relative to the section values of this stencil.
    const double noise = std::max({std::abs(s[k]), std::abs(s[k + 1]), std::abs(s[k + 2])}) /
                         (grid[k + 1] - grid[k]);
    const double tol = 1e-9 * (std::abs(slope[k]) + std::abs(slope[k + 1])) + 1e-12 * noise;
    if (!(rise > tol)) strict = false;
    const double second = 2.0 * rise / (grid[k + 2] - grid[k]);
    report.min_second_difference = std::min(report.min_second_difference, second);
  }
  report.is_strictly_convex = strict;
  return report;
}

std::vector<double> default_radial_grid(const MatrixF& x) {
  const double n = x.norm();
  std::vector<double> grid;
  for (int k = -8; k <= 8; ++k) grid.push_back(n * std::ldexp(1.0, k));
  return grid;
}

}  // namespace invhull
