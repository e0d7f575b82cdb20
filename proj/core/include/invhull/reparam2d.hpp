#pragma once

#include "invhull/disk_mesh.hpp"
#include "invhull/hull1d.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace invhull {

// Per-triangle Beltrami coefficients.
struct BeltramiField {
  std::vector<std::complex<double>> mu;

  double max_abs() const;
  static BeltramiField constant(int triangles, std::complex<double> value);
};

// Which boundary angles of a disk diffeomorphism may move.
struct BoundaryPolicy {
  enum class Kind { three_point, fixed_boundary, free };
  Kind kind = Kind::three_point;
  // Circle points kept fixed under three_point, as angles.
  std::array<double, 3> angles{};

  static BoundaryPolicy three_point(std::array<double, 3> angles);
  static BoundaryPolicy three_point();  // 0, 2 pi / 3, 4 pi / 3
  static BoundaryPolicy fixed_boundary();
  static BoundaryPolicy free();
};

// The pi/2 rotation Q = [[0, 1], [-1, 0]]; Q^T = -Q and Q^2 = -I.
struct RotationQ {
  static Eigen::Matrix2d matrix();
};

// A piecewise-linear orientation-preserving map of the unit disk onto itself.
// Boundary vertices are encoded by their image angles, which stay strictly
// increasing within one turn; interior vertices by their image points.
class DiskDiffeo {
 public:
  static DiskDiffeo identity(std::shared_ptr<const TriMesh> mesh, BoundaryPolicy policy);

  const TriMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }
  const BoundaryPolicy& policy() const { return policy_; }
  const std::vector<Vec2>& positions() const { return positions_; }
  const std::vector<double>& angles() const { return angles_; }
  // Boundary slots (indices into mesh().boundary_loop) pinned by the policy.
  const std::vector<int>& marked() const { return marked_; }
  bool is_marked(int slot) const;
  const std::vector<Eigen::Matrix2d>& jacobian() const { return jacobian_; }

  // Replace interior points and boundary angles; boundary points follow the
  // angles. Recomputes the per-triangle Jacobians.
  void set(std::vector<Vec2> interior_and_boundary, std::vector<double> angles);

  double min_det() const;
  bool angles_monotone() const;
  // Throws FoldError naming the first non-positive triangle, or
  // RegularityError when boundary angles leave their order or marked points move.
  void validate() const;

 private:
  DiskDiffeo() = default;
  void refresh();

  std::shared_ptr<const TriMesh> mesh_;
  BoundaryPolicy policy_;
  std::vector<Vec2> positions_;
  std::vector<double> angles_;
  std::vector<int> marked_;
  std::vector<Eigen::Matrix2d> jacobian_;
};

// Per-triangle mu = (E - G + 2iF) / (E + G + 2 sqrt(EG - F^2)) with E, F, G the
// Gram entries of the surface. Throws RegularityError naming a degenerate triangle.
BeltramiField beltrami_coefficient(const SurfaceSample& s);

// Symmetric coefficient of the elliptic form of the Beltrami equation:
// (1 / (1 - |mu|^2)) [[|1 - mu|^2, -2 Im mu], [-2 Im mu, |1 + mu|^2]].
Eigen::Matrix2d beltrami_coefficient_matrix(std::complex<double> mu);

enum class LinearSolver { cholesky, cg };

struct BeltramiSolveOptions {
  // Sparse Cholesky by default; Jacobi-preconditioned CG is the fallback
  // for systems too large to factor.
  LinearSolver solver = LinearSolver::cholesky;
  double cg_tolerance = 1e-12;
  double residual_tolerance = 1e-8;
  int max_outer = 100;
  // Warm start for the boundary angles; mesh angles when empty.
  std::vector<double> initial_angles;
  // When Newton stalls from the warm start, retry by scaling mu from 0 to 1
  // in this many steps (0 disables the retry).
  int continuation_steps = 8;
};

// Solves div(A_mu grad phi_i) = 0 for both components with P1 elements. The
// boundary angles minimize the conformal energy (Dirichlet energy of the harmonic
// extension minus the area enclosed by the image polygon) by
// Newton steps with the policy's marked points held fixed.
// Throws UsageError for the free policy, SolverError when the angle
// residual does not fall below tolerance, FoldError when the result folds.
DiskDiffeo linear_beltrami_solve(std::shared_ptr<const TriMesh> mesh,
                                 const BeltramiField& mu, const BoundaryPolicy& policy,
                                 const BeltramiSolveOptions& options = {});

// Area-weighted L2 norm of dbar(Phi) - mu d(Phi), relative to that of d(Phi).
double beltrami_residual(const DiskDiffeo& phi, const BeltramiField& mu);

// Dirichlet energy of u o Phi^{-1} computed per triangle as
//   area(T) / (grad phi_1 . Q grad phi_2) * sum_ij 1/2 (Q grad u_i . grad phi_j)^2.
// Throws FoldError on a non-positive Jacobian.
double energy_of_reparam(const SurfaceSample& s, const DiskDiffeo& phi);

enum class StepPolicy { lbfgs, steepest };

struct DescentOptions {
  StepPolicy policy = StepPolicy::lbfgs;
  int memory = 10;
  double gradient_tolerance = 1e-11;
};

struct DescentResult {
  DiskDiffeo phi;
  std::vector<double> history;  // energy after each accepted step, starting at phi0
  bool stalled = false;         // no admissible step larger than 1e-14
  int iterations = 0;
};

DescentResult inner_variation_descent(const SurfaceSample& s, const DiskDiffeo& phi0,
                                      int iters, const DescentOptions& options = {});

// Transfers Phi to a finer disk mesh: interior vertices by P1 interpolation,
// boundary angles linearly between the nested coarse boundary vertices.
// Throws FoldError if the transferred map folds.
DiskDiffeo prolongate(const DiskDiffeo& coarse, std::shared_ptr<const TriMesh> fine);

// Area-weighted mean of |M/tr M - I/2|_F with M = adj(grad Phi) Gram adj(grad Phi)^T.
double conformality_defect(const SurfaceSample& s, const DiskDiffeo& phi);

// Identity plus a smooth random displacement in polar form; boundary angles
// move only where the policy allows. Halves the magnitude until valid.
DiskDiffeo random_diffeo(std::shared_ptr<const TriMesh> mesh, const BoundaryPolicy& policy,
                         double magnitude, std::uint64_t seed = kDefaultSeed);

// Radial map r -> r (1 + strength (1 - r)), boundary fixed. strength in (-1, 1).
DiskDiffeo radial_stretch_diffeo(std::shared_ptr<const TriMesh> mesh, double strength);

// Samples u o Phi^{-1} on the mesh vertices by locating each vertex in the
// image triangulation and evaluating u at the barycentric preimage.
SurfaceSample pullback(const SurfaceMap& u, const DiskDiffeo& phi);

}  // namespace invhull
