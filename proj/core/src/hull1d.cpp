#include "invhull/hull1d.hpp"

#include "invhull/errors.hpp"
#include "invhull/quadrature.hpp"
#include "invhull/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace invhull {

Reparam1D Reparam1D::from_slopes(std::vector<double> slopes) {
  Reparam1D r;
  const double dt = 1.0 / static_cast<double>(slopes.size());
  r.values.resize(slopes.size() + 1);
  r.values[0] = 0.0;
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    r.values[k + 1] = r.values[k] + slopes[k] * dt;
  }
  const double total = r.values.back();
  for (auto& v : r.values) v /= total;
  r.values.back() = 1.0;
  for (auto& v : slopes) v /= total;
  r.slopes = std::move(slopes);
  return r;
}

double Reparam1D::normalization_defect() const {
  const double dt = 1.0 / static_cast<double>(slopes.size());
  double s = 0.0;
  for (double v : slopes) s += v * dt;
  return s - 1.0;
}

std::string to_string(HullStatus status) {
  switch (status) {
    case HullStatus::closed_form:
      return "closed_form";
    case HullStatus::degree_one_invariant:
      return "degree_one_invariant";
    case HullStatus::trivial_zero:
      return "trivial_zero";
    case HullStatus::oracle_only:
      return "oracle_only";
  }
  return "unknown";
}

double evaluate_functional_1d(const Density& w, const SampledCurve& u) {
  u.require_regular();
  double s = 0.0;
  for (const auto& d : u.derivatives()) s += w(d);
  return s * u.dt();
}

double reparameterized_functional(const Density& w, const SampledCurve& u,
                                  const std::vector<double>& slopes) {
  const auto& du = u.derivatives();
  double s = 0.0;
  for (std::size_t k = 0; k < du.size(); ++k) s += slopes[k] * w(du[k] / slopes[k]);
  return s * u.dt();
}

namespace {

constexpr int kMaxExpansions = 200;
const double kLog2 = std::log(2.0);

enum class Inversion { root, above_range, below_range };

struct InversionResult {
  Inversion kind;
  double r;
};

// g(., x) is increasing for radially strictly convex W. Works on rho = ln r.
InversionResult invert_g_unchecked(const Density& w, double c, const MatrixF& x,
                                   double start) {
  auto h = [&](double rho) {
    const MatrixF y = x * std::exp(-rho);
    const double v = w(y) - (w.gradient(y).cwiseProduct(y)).sum() - c;
    return std::isnan(v) ? std::numeric_limits<double>::quiet_NaN() : v;
  };
  const double ftol = 1e-12 * std::abs(c) + 1e-15;
  double rho = std::log(start);
  double hv = h(rho);
  if (std::isnan(hv)) return {Inversion::above_range, 0.0};
  if (std::abs(hv) <= ftol) return {Inversion::root, start};

  double lo, hi, flo, fhi;
  double step = kLog2;
  if (hv < 0.0) {
    lo = rho;
    flo = hv;
    int k = 0;
    for (; k < kMaxExpansions; ++k) {
      const double next = lo + step;
      const double hn = h(next);
      if (std::isnan(hn)) return {Inversion::above_range, 0.0};
      if (hn >= 0.0) {
        hi = next;
        fhi = hn;
        break;
      }
      lo = next;
      flo = hn;
      step *= 2.0;
    }
    if (k == kMaxExpansions) return {Inversion::above_range, 0.0};
  } else {
    hi = rho;
    fhi = hv;
    int k = 0;
    for (; k < kMaxExpansions; ++k) {
      const double next = hi - step;
      const double hn = h(next);
      if (std::isnan(hn)) return {Inversion::below_range, 0.0};
      if (hn <= 0.0) {
        lo = next;
        flo = hn;
        break;
      }
      hi = next;
      fhi = hn;
      step *= 2.0;
    }
    if (k == kMaxExpansions) return {Inversion::below_range, 0.0};
  }
  const RootResult root = bracketed_root(h, lo, hi, flo, fhi, ftol, 1e-15);
  return {Inversion::root, std::exp(root.x)};
}

void require_convex_section(const Density& w, const MatrixF& x) {
  const auto grid = default_radial_grid(x);
  if (!radial_convexity_probe(w, x, grid).is_strictly_convex) {
    throw ConvexityError("density '" + w.id() +
                         "' is not radially strictly convex along the sample");
  }
}

struct Normalization {
  double c = 0.0;
  std::vector<double> slopes;
  double residual = 0.0;
};

Normalization solve_normalization(const Density& w, const SampledCurve& u) {
  u.require_regular();
  const auto& du = u.derivatives();
  const double dt = u.dt();
  std::vector<double> hint(du.size(), 1.0);
  std::vector<double> r(du.size(), 1.0);

  // +inf: c above the range of g for some sample (slopes unbounded);
  // -inf: c below the range for some sample.
  auto residual = [&](double c) {
    double total = 0.0;
    for (std::size_t k = 0; k < du.size(); ++k) {
      const auto inv = invert_g_unchecked(w, c, du[k], hint[k]);
      if (inv.kind == Inversion::above_range) return std::numeric_limits<double>::infinity();
      if (inv.kind == Inversion::below_range) return -std::numeric_limits<double>::infinity();
      r[k] = inv.r;
      total += inv.r;
    }
    hint = r;
    return total * dt - 1.0;
  };

  double c0 = 0.0;
  for (const auto& d : du) c0 += g_function(w, 1.0, d, u.scale());
  c0 /= static_cast<double>(du.size());
  double r0 = residual(c0);
  if (r0 == 0.0) return {c0, r, 0.0};

  double lo, hi, flo, fhi;
  double delta = std::max(std::abs(c0), 1e-12);
  int k = 0;
  if (r0 < 0.0) {
    lo = c0;
    flo = r0;
    for (; k < kMaxExpansions; ++k) {
      const double next = lo + delta;
      const double rn = residual(next);
      if (rn >= 0.0) {
        hi = next;
        fhi = rn;
        break;
      }
      lo = next;
      flo = rn;
      delta *= 2.0;
    }
  } else {
    hi = c0;
    fhi = r0;
    for (; k < kMaxExpansions; ++k) {
      const double next = hi - delta;
      const double rn = residual(next);
      if (rn <= 0.0) {
        lo = next;
        flo = rn;
        break;
      }
      hi = next;
      fhi = rn;
      delta *= 2.0;
    }
  }
  if (k == kMaxExpansions) {
    throw InfeasibleNormalizationError(
        "solve_c: no bracket for the normalization condition");
  }
  // The final evaluation leaves r at the returned c.
  const RootResult root = bracketed_root(residual, lo, hi, flo, fhi, 2e-10,
                                         1e-15 * (1.0 + std::abs(lo) + std::abs(hi)));
  const double res = residual(root.x);
  if (!std::isfinite(res) || std::abs(res) > 1e-9) {
    throw InfeasibleNormalizationError("solve_c: normalization residual " +
                                       std::to_string(res) + " above 1e-9");
  }
  return {root.x, r, res};
}

}  // namespace

double invert_g(const Density& w, double c, const MatrixF& x, double start) {
  if (!(start > 0.0)) throw DomainError("invert_g: start must be positive");
  if (x.norm() < kRegularityEpsilon) {
    throw RegularityError("invert_g: degenerate direction");
  }
  require_convex_section(w, x);
  const auto inv = invert_g_unchecked(w, c, x, start);
  if (inv.kind != Inversion::root) {
    throw NoRootError("invert_g: c = " + std::to_string(c) +
                      " is outside the range of g(., x)");
  }
  return inv.r;
}

double solve_c(const Density& w, const SampledCurve& u) {
  u.require_regular();
  for (const auto& d : u.derivatives()) require_convex_section(w, d);
  return solve_normalization(w, u).c;
}

double el_first_integral_stdev(const Density& w, const SampledCurve& u,
                               const std::vector<double>& slopes) {
  const auto& du = u.derivatives();
  std::vector<double> g(du.size());
  for (std::size_t k = 0; k < du.size(); ++k) g[k] = g_function(w, slopes[k], du[k], u.scale());
  const double mean = std::accumulate(g.begin(), g.end(), 0.0) / g.size();
  double var = 0.0;
  for (double v : g) var += (v - mean) * (v - mean);
  return std::sqrt(var / g.size());
}

DirectMinimizeResult direct_minimize_reparam(const Density& w,
                                             const SampledCurve& u, int iters,
                                             std::uint64_t seed) {
  u.require_regular();
  const auto& du = u.derivatives();
  const std::size_t n = du.size();
  const double dt = u.dt();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::vector<double> logs(n);
  for (auto& l : logs) l = jitter(rng);

  auto slopes_of = [&](const std::vector<double>& l) {
    const double top = *std::max_element(l.begin(), l.end());
    std::vector<double> s(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = std::exp(l[k] - top);
      total += s[k] * dt;
    }
    for (auto& v : s) v /= total;
    return s;
  };
  auto objective = [&](const std::vector<double>& s) {
    double j = 0.0;
    for (std::size_t k = 0; k < n; ++k) j += s[k] * w(du[k] / s[k]);
    return j * dt;
  };

  std::vector<double> s = slopes_of(logs);
  double value = objective(s);
  DirectMinimizeResult out;
  out.history.push_back(value);

  double eta = 0.5;
  std::vector<double> g(n), trial(n);
  for (int it = 0; it < iters; ++it) {
    double gbar = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const MatrixF y = du[k] / s[k];
      g[k] = w(y) - (w.gradient(y).cwiseProduct(y)).sum();
      gbar += s[k] * dt * g[k];
    }
    // Descent direction in log-slopes: -(g_k - gbar), scaled by |gbar| so
    // that the step is dimensionless.
    const double scale = std::max(std::abs(gbar), 1e-300);
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (std::size_t k = 0; k < n; ++k) {
        const double step = std::clamp(-eta * (g[k] - gbar) / scale, -5.0, 5.0);
        trial[k] = logs[k] + step;
      }
      const std::vector<double> st = slopes_of(trial);
      const double vt = objective(st);
      if (vt < value) {
        logs.swap(trial);
        s = st;
        value = vt;
        eta = std::min(eta * 1.5, 1e6);
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    out.history.push_back(value);
    if (!accepted) break;
  }
  out.value = value;
  out.phi = Reparam1D::from_slopes(s);
  return out;
}

double composed_functional(const Density& w, const SampledCurve& u, double j) {
  return graded_integral([&](double t) {
    if (t <= 0.0) return 0.0;
    const double psi = std::exp((j + 1.0) * std::log(t));
    const double dpsi = (j + 1.0) * std::exp(j * std::log(t));
    return w(u.derivative_at(psi) * dpsi);
  });
}

std::vector<double> triviality_probe(const Density& w, const SampledCurve& u,
                                     int j_max) {
  u.require_regular();
  std::vector<double> values;
  values.reserve(std::max(j_max, 0));
  for (int j = 1; j <= j_max; ++j) values.push_back(composed_functional(w, u, j));
  return values;
}

HullResult1D invariant_hull_1d(const Density& w, const SampledCurve& u,
                               const Hull1DOptions& options) {
  u.require_regular();
  HullResult1D result;
  result.functional = evaluate_functional_1d(w, u);
  const auto& du = u.derivatives();

  double max_g = 0.0;
  bool degree_one = true;
  for (const auto& d : du) {
    const double g1 = g_function(w, 1.0, d, u.scale());
    max_g = std::max(max_g, std::abs(g1));
    if (!(std::abs(g1) < 1e-10 * (1.0 + std::abs(w(d))))) {
      degree_one = false;
      break;
    }
  }
  if (degree_one) {
    result.status = HullStatus::degree_one_invariant;
    result.value = result.functional;
    result.c = 0.0;
    result.slopes = Reparam1D::from_slopes(std::vector<double>(du.size(), 1.0));
    return result;
  }

  bool convex = true;
  for (const auto& d : du) {
    const auto grid = default_radial_grid(d);
    if (!radial_convexity_probe(w, d, grid).is_strictly_convex) {
      convex = false;
      break;
    }
  }

  if (convex) {
    const Normalization norm = solve_normalization(w, u);
    result.status = HullStatus::closed_form;
    result.c = norm.c;
    result.normalization_residual = norm.residual;
    result.value = reparameterized_functional(w, u, norm.slopes);
    result.el_stdev = el_first_integral_stdev(w, u, norm.slopes);
    result.slopes = Reparam1D::from_slopes(norm.slopes);
    return result;
  }

  const auto direct = direct_minimize_reparam(w, u, options.oracle_iters, options.seed);
  result.oracle_value = direct.value;
  result.slopes = direct.phi;
  result.probe = triviality_probe(w, u, options.probe_j_max);
  // The j = 1..j_max sequence decays slowly; test far along it as well.
  double smallest = direct.value;
  for (double v : result.probe) smallest = std::min(smallest, v);
  for (int k = 0; k <= 26; ++k) {
    smallest = std::min(smallest, composed_functional(w, u, std::ldexp(1.0, k)));
  }
  if (smallest < 1e-3 * result.functional) {
    result.status = HullStatus::trivial_zero;
    result.value = 0.0;
  } else {
    result.status = HullStatus::oracle_only;
    result.value = direct.value;
  }
  return result;
}

}  // namespace invhull
