#pragma once

#include "invhull/curve.hpp"
#include "invhull/density.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace invhull {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

// A discrete reparameterization: positive slopes phi'_k per cell and the
// cumulative values phi_k (phi_0 = 0, phi_n = 1).
struct Reparam1D {
  std::vector<double> slopes;
  std::vector<double> values;

  // Cumulative values from slopes; both are rescaled so phi(1) = 1.
  static Reparam1D from_slopes(std::vector<double> slopes);
  // sum_k s_k dt - 1
  double normalization_defect() const;
};

enum class HullStatus { closed_form, degree_one_invariant, trivial_zero, oracle_only };
std::string to_string(HullStatus status);

struct HullResult1D {
  double value = 0.0;       // I_i(u)
  double functional = 0.0;  // I(u)
  std::optional<double> c;  // Lagrange constant c(u), closed form only
  Reparam1D slopes;         // optimal phi'
  HullStatus status = HullStatus::closed_form;
  std::optional<double> oracle_value;  // direct minimizer, when it ran
  std::vector<double> probe;           // I(u o psi_j), j = 1..j_max, when it ran
  double normalization_residual = 0.0;
  double el_stdev = 0.0;  // spread of g(phi'_k, u'_k) across cells
};

struct Hull1DOptions {
  int oracle_iters = 2000;
  std::uint64_t seed = kDefaultSeed;
  int probe_j_max = 50;
};

// Midpoint rule for int_0^1 W(u'(t)) dt. Throws RegularityError.
double evaluate_functional_1d(const Density& w, const SampledCurve& u);

// sum_k s_k W(u'_k / s_k) dt for given slopes.
double reparameterized_functional(const Density& w, const SampledCurve& u,
                                  const std::vector<double>& slopes);

// r = f(c, x), the inverse of r -> g(r, x). Bracket expansion by doubling
// from r = `start` (200 steps at most), then bracketed bisection on log r.
// Throws ConvexityError when the section at x is not strictly convex and
// NoRootError when c is outside the range of g(., x).
double invert_g(const Density& w, double c, const MatrixF& x, double start = 1.0);

// The constant c(u) with sum_k f(c, u'_k) dt = 1 (to 1e-9).
// Throws InfeasibleNormalizationError when no bracket is found.
double solve_c(const Density& w, const SampledCurve& u);

// The invariant realization I_i(u): closed form for radially strictly convex
// W, pass-through for degree-one W, direct minimization otherwise.
HullResult1D invariant_hull_1d(const Density& w, const SampledCurve& u,
                               const Hull1DOptions& options = {});

struct DirectMinimizeResult {
  double value = 0.0;
  Reparam1D phi;
  std::vector<double> history;
};

// Minimizes sum_k s_k W(u'_k / s_k) dt over positive slopes with
// sum_k s_k dt = 1 by descent in log-slope coordinates with multiplicative
// renormalization. Deterministic given the seed.
DirectMinimizeResult direct_minimize_reparam(const Density& w,
                                             const SampledCurve& u, int iters,
                                             std::uint64_t seed);

// I(u o psi) for psi(t) = t^{j+1}, i.e. int_0^1 W(u'(psi(t)) psi'(t)) dt,
// with quadrature graded toward the endpoints. j may be fractional.
double composed_functional(const Density& w, const SampledCurve& u, double j);

// I(u o psi_j) for j = 1..j_max.
std::vector<double> triviality_probe(const Density& w, const SampledCurve& u,
                                     int j_max);

// Population standard deviation of g(s_k, u'_k) across cells.
double el_first_integral_stdev(const Density& w, const SampledCurve& u,
                               const std::vector<double>& slopes);

}  // namespace invhull
