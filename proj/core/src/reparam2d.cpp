#include "invhull/reparam2d.hpp"

#include "invhull/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <memory>

namespace invhull {

namespace {

using std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kWarmStartLevel = 3;

Vec2 on_circle(double angle) { return {std::cos(angle), std::sin(angle)}; }

Eigen::Matrix2d jacobian_of(const TriMesh& mesh, const std::vector<Vec2>& p, int t) {
  const auto& tri = mesh.triangles[t];
  const Grad32& gl = mesh.grad_lambda[t];
  Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
  for (int c = 0; c < 3; ++c) j += p[tri[c]] * gl.row(c);
  return j;
}

// Cofactor of a 2 x 2 matrix: cof(J) J^T = det(J) I, equivalently Q J Q^T.
Eigen::Matrix2d cofactor2(const Eigen::Matrix2d& j) {
  Eigen::Matrix2d c;
  c << j(1, 1), -j(1, 0), -j(0, 1), j(0, 0);
  return c;
}

int nearest_slot(const TriMesh& mesh, double angle) {
  const int n = static_cast<int>(mesh.boundary_loop.size());
  double a = std::fmod(angle, 2.0 * pi);
  if (a < 0.0) a += 2.0 * pi;
  return static_cast<int>(std::lround(a * n / (2.0 * pi))) % n;
}

bool monotone(const std::vector<double>& angles) {
  const std::size_t n = angles.size();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (!(angles[j + 1] > angles[j])) return false;
  }
  return n == 0 || angles[n - 1] < angles[0] + 2.0 * pi;
}

// Image angles on a boundary refined `ratio` times, interpolated linearly
// between the coarse vertices.
std::vector<double> refine_angles(const std::vector<double>& coarse, int ratio) {
  const int nc = static_cast<int>(coarse.size());
  std::vector<double> theta(static_cast<std::size_t>(nc) * ratio);
  for (int j = 0; j < nc * ratio; ++j) {
    const int i = j / ratio;
    const double next = i + 1 < nc ? coarse[i + 1] : coarse[0] + 2.0 * pi;
    theta[j] = coarse[i] + (next - coarse[i]) * (j % ratio) / ratio;
  }
  return theta;
}

// Point location in the triangulation of `points` with the connectivity of
// `mesh`, through a bucket grid over [-1, 1]^2.
class TriangleLocator {
 public:
  TriangleLocator(const TriMesh& mesh, const std::vector<Vec2>& points)
      : mesh_(mesh), points_(points), cells_(2 << mesh.levels) {
    grid_.resize(static_cast<std::size_t>(cells_) * cells_);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles[t];
      Vec2 lo = points[tri[0]];
      Vec2 hi = lo;
      for (int c = 1; c < 3; ++c) {
        lo = lo.cwiseMin(points[tri[c]]);
        hi = hi.cwiseMax(points[tri[c]]);
      }
      for (int i = cell(lo.x()); i <= cell(hi.x()); ++i) {
        for (int j = cell(lo.y()); j <= cell(hi.y()); ++j) grid_[i * cells_ + j].push_back(t);
      }
    }
  }

  // Triangle containing x and its barycentric coordinates; points outside
  // the triangulation get the nearest triangle with clamped coordinates.
  std::pair<int, Eigen::Vector3d> locate(const Vec2& x) const {
    int best = -1;
    double best_min = -kInf;
    Eigen::Vector3d best_bary = Eigen::Vector3d::Zero();
    auto consider = [&](int t) {
      const Eigen::Vector3d bary = barycentric(t, x);
      if (bary.minCoeff() > best_min) {
        best_min = bary.minCoeff();
        best = t;
        best_bary = bary;
      }
    };
    for (int t : grid_[cell(x.x()) * cells_ + cell(x.y())]) {
      consider(t);
      if (best_min >= 0.0) break;
    }
    if (best < 0) {
      for (int t = 0; t < mesh_.triangle_count(); ++t) consider(t);
    }
    best_bary = best_bary.cwiseMax(0.0);
    best_bary /= best_bary.sum();
    return {best, best_bary};
  }

  // Source-mesh point with the same barycentric coordinates.
  Vec2 source_point(const Vec2& x) const {
    const auto [t, bary] = locate(x);
    const auto& tri = mesh_.triangles[t];
    return bary(0) * mesh_.vertices[tri[0]] + bary(1) * mesh_.vertices[tri[1]] +
           bary(2) * mesh_.vertices[tri[2]];
  }

 private:
  int cell(double c) const {
    return std::clamp(static_cast<int>((c + 1.0) * 0.5 * cells_), 0, cells_ - 1);
  }

  Eigen::Vector3d barycentric(int t, const Vec2& x) const {
    const auto& tri = mesh_.triangles[t];
    const Vec2& a = points_[tri[0]];
    const Vec2& b = points_[tri[1]];
    const Vec2& c = points_[tri[2]];
    const double total = triangle_signed_area(a, b, c);
    return Eigen::Vector3d(triangle_signed_area(x, b, c) / total,
                           triangle_signed_area(a, x, c) / total,
                           triangle_signed_area(a, b, x) / total);
  }

  const TriMesh& mesh_;
  const std::vector<Vec2>& points_;
  int cells_;
  std::vector<std::vector<int>> grid_;
};

}  // namespace

double BeltramiField::max_abs() const {
  double m = 0.0;
  for (const auto& z : mu) m = std::max(m, std::abs(z));
  return m;
}

BeltramiField BeltramiField::constant(int triangles, std::complex<double> value) {
  return BeltramiField{std::vector<std::complex<double>>(triangles, value)};
}

BoundaryPolicy BoundaryPolicy::three_point(std::array<double, 3> angles) {
  return BoundaryPolicy{Kind::three_point, angles};
}

BoundaryPolicy BoundaryPolicy::three_point() {
  return three_point({0.0, 2.0 * pi / 3.0, 4.0 * pi / 3.0});
}

BoundaryPolicy BoundaryPolicy::fixed_boundary() { return BoundaryPolicy{Kind::fixed_boundary, {}}; }

BoundaryPolicy BoundaryPolicy::free() { return BoundaryPolicy{Kind::free, {}}; }

Eigen::Matrix2d RotationQ::matrix() {
  Eigen::Matrix2d q;
  q << 0.0, 1.0, -1.0, 0.0;
  return q;
}

DiskDiffeo DiskDiffeo::identity(std::shared_ptr<const TriMesh> mesh, BoundaryPolicy policy) {
  DiskDiffeo phi;
  phi.mesh_ = std::move(mesh);
  phi.policy_ = policy;
  phi.positions_ = phi.mesh_->vertices;
  phi.angles_ = phi.mesh_->boundary_angle;
  if (policy.kind == BoundaryPolicy::Kind::three_point) {
    for (double a : policy.angles) phi.marked_.push_back(nearest_slot(*phi.mesh_, a));
    std::vector<int> sorted = phi.marked_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw UsageError("three-point policy needs three distinct boundary points");
    }
  } else if (policy.kind == BoundaryPolicy::Kind::fixed_boundary) {
    for (int j = 0; j < static_cast<int>(phi.angles_.size()); ++j) phi.marked_.push_back(j);
  }
  phi.refresh();
  return phi;
}

bool DiskDiffeo::is_marked(int slot) const {
  return std::find(marked_.begin(), marked_.end(), slot) != marked_.end();
}

void DiskDiffeo::set(std::vector<Vec2> points, std::vector<double> angles) {
  if (points.size() != positions_.size() || angles.size() != angles_.size()) {
    throw UsageError("diffeomorphism data does not match the mesh");
  }
  positions_ = std::move(points);
  angles_ = std::move(angles);
  refresh();
}

void DiskDiffeo::refresh() {
  for (std::size_t j = 0; j < angles_.size(); ++j) {
    positions_[mesh_->boundary_loop[j]] = on_circle(angles_[j]);
  }
  jacobian_.resize(mesh_->triangles.size());
  for (int t = 0; t < mesh_->triangle_count(); ++t) jacobian_[t] = jacobian_of(*mesh_, positions_, t);
}

double DiskDiffeo::min_det() const {
  double m = kInf;
  for (const auto& j : jacobian_) m = std::min(m, j.determinant());
  return m;
}

bool DiskDiffeo::angles_monotone() const { return monotone(angles_); }

void DiskDiffeo::validate() const {
  for (std::size_t t = 0; t < jacobian_.size(); ++t) {
    if (!(jacobian_[t].determinant() > 0.0)) {
      throw FoldError("reparameterization folds at triangle " + std::to_string(t),
                      static_cast<int>(t));
    }
  }
  if (!angles_monotone()) throw RegularityError("boundary angles are not increasing");
  for (int slot : marked_) {
    if (angles_[slot] != mesh_->boundary_angle[slot]) {
      throw RegularityError("marked boundary point moved");
    }
  }
}

BeltramiField beltrami_coefficient(const SurfaceSample& s) {
  BeltramiField field;
  field.mu.reserve(s.gram.size());
  for (std::size_t t = 0; t < s.gram.size(); ++t) {
    const double e = s.gram[t](0, 0);
    const double f = s.gram[t](0, 1);
    const double g = s.gram[t](1, 1);
    const double det = e * g - f * f;
    if (!(det > 1e-14 * (e + g) * (e + g))) {
      throw RegularityError("surface is degenerate at triangle " + std::to_string(t));
    }
    field.mu.emplace_back(std::complex<double>(e - g, 2.0 * f) / (e + g + 2.0 * std::sqrt(det)));
  }
  return field;
}

Eigen::Matrix2d beltrami_coefficient_matrix(std::complex<double> mu) {
  const double scale = 1.0 / (1.0 - std::norm(mu));
  Eigen::Matrix2d a;
  a << std::norm(1.0 - mu), -2.0 * mu.imag(), -2.0 * mu.imag(), std::norm(1.0 + mu);
  return scale * a;
}

namespace {

// P1 discretization of div(A_mu grad phi) split into interior (I) and
// boundary (B) unknowns, with the boundary Schur complement
// S = K_BB - K_BI K_II^{-1} K_IB of the harmonic extension.
class HarmonicSystem {
 public:
  HarmonicSystem(const TriMesh& mesh, const BeltramiField& mu, double scale,
                 const BeltramiSolveOptions& options)
      : mesh_(mesh), options_(options) {
    const int nv = mesh.vertex_count();
    nb_ = static_cast<int>(mesh.boundary_loop.size());
    interior_index_.assign(nv, -1);
    for (int v = 0; v < nv; ++v) {
      if (!mesh.is_boundary(v)) interior_index_[v] = ni_++;
    }
    std::vector<Eigen::Triplet<double>> kii;
    std::vector<Eigen::Triplet<double>> kib;
    Eigen::MatrixXd kbb = Eigen::MatrixXd::Zero(nb_, nb_);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles[t];
      const Grad32& gl = mesh.grad_lambda[t];
      const Eigen::Matrix3d local =
          mesh.area[t] * gl * beltrami_coefficient_matrix(scale * mu.mu[t]) * gl.transpose();
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const int ia = interior_index_[tri[a]];
          const int ib = interior_index_[tri[b]];
          if (ia >= 0 && ib >= 0) {
            kii.emplace_back(ia, ib, local(a, b));
          } else if (ia >= 0) {
            kib.emplace_back(ia, mesh.boundary_index[tri[b]], local(a, b));
          } else if (ib < 0) {
            kbb(mesh.boundary_index[tri[a]], mesh.boundary_index[tri[b]]) += local(a, b);
          }
        }
      }
    }
    kii_.resize(ni_, ni_);
    kii_.setFromTriplets(kii.begin(), kii.end());
    kib_.resize(ni_, nb_);
    kib_.setFromTriplets(kib.begin(), kib.end());

    if (options.solver == LinearSolver::cholesky) {
      ldlt_.compute(kii_);
      if (ldlt_.info() != Eigen::Success) throw SolverError("interior stiffness factorization failed", {});
    } else {
      cg_.setTolerance(options.cg_tolerance);
      cg_.setMaxIterations(10 * std::max(ni_, 100));
      cg_.compute(kii_);
    }

    schur_ = kbb;
    constexpr int kBlock = 64;
    for (int j0 = 0; j0 < nb_; j0 += kBlock) {
      const int w = std::min(kBlock, nb_ - j0);
      const Eigen::MatrixXd rhs = Eigen::MatrixXd(kib_.middleCols(j0, w));
      schur_.middleCols(j0, w) -= kib_.transpose() * solve(rhs);
    }
    schur_ = 0.5 * (schur_ + schur_.transpose()).eval();
  }

  int boundary_size() const { return nb_; }
  const Eigen::MatrixXd& schur() const { return schur_; }

  // Interior values of the discrete harmonic extension of boundary data b.
  Eigen::MatrixXd extend(const Eigen::MatrixXd& b) const { return -solve(kib_ * b); }
  int interior_index(int v) const { return interior_index_[v]; }

 private:
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    if (options_.solver == LinearSolver::cholesky) return ldlt_.solve(rhs);
    Eigen::MatrixXd out(rhs.rows(), rhs.cols());
    for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
      out.col(j) = cg_.solve(rhs.col(j));
      if (cg_.info() != Eigen::Success) {
        throw SolverError("conjugate gradient did not converge", {cg_.error()});
      }
    }
    return out;
  }

  const TriMesh& mesh_;
  BeltramiSolveOptions options_;
  int ni_ = 0;
  int nb_ = 0;
  std::vector<int> interior_index_;
  Eigen::SparseMatrix<double> kii_;
  Eigen::SparseMatrix<double> kib_;
  Eigen::MatrixXd schur_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg_;
};

struct AngleSolve {
  std::vector<double> theta;
  std::vector<double> history;  // gradient sup-norm per Newton iteration
  bool converged = false;
};

// Newton iteration on the free boundary angles. The angles minimize the
// conformal energy: the Dirichlet energy of the harmonic extension minus
// the area enclosed by the image polygon. The Dirichlet energy alone
// rewards clustering boundary vertices, which shrinks the polygon.
AngleSolve solve_angles(const HarmonicSystem& system, const std::vector<int>& free_slots,
                        std::vector<double> theta, const BeltramiSolveOptions& options) {
  const int nb = system.boundary_size();
  const int nf = static_cast<int>(free_slots.size());
  const Eigen::MatrixXd& schur = system.schur();
  auto gap = [nb](const std::vector<double>& th, int j) {
    const int jj = (j + nb) % nb;
    const double next = jj + 1 < nb ? th[jj + 1] : th[0] + 2.0 * pi;
    return next - th[jj];
  };
  auto trig = [nb](const std::vector<double>& th) {
    const Eigen::Map<const Eigen::VectorXd> t(th.data(), nb);
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>(t.array().cos(), t.array().sin());
  };
  auto energy = [&](const std::vector<double>& th) {
    const auto [c, s] = trig(th);
    double enclosed = 0.0;
    for (int j = 0; j < nb; ++j) enclosed += std::sin(gap(th, j));
    return 0.5 * (c.dot(schur * c) + s.dot(schur * s)) - 0.5 * enclosed;
  };
  auto gradient = [&](const std::vector<double>& th) {
    const auto [c, s] = trig(th);
    const Eigen::VectorXd sc = schur * c;
    const Eigen::VectorXd ss = schur * s;
    Eigen::VectorXd g(nf);
    for (int i = 0; i < nf; ++i) {
      const int j = free_slots[i];
      g(i) = -s(j) * sc(j) + c(j) * ss(j) -
             0.5 * (std::cos(gap(th, j - 1)) - std::cos(gap(th, j)));
    }
    return g;
  };
  std::vector<int> free_pos(nb, -1);
  for (int i = 0; i < nf; ++i) free_pos[free_slots[i]] = i;

  AngleSolve out;
  double e = energy(theta);
  for (int outer = 0; outer <= options.max_outer; ++outer) {
    const Eigen::VectorXd g = gradient(theta);
    const double residual = nf == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>();
    out.history.push_back(residual);
    if (residual < options.residual_tolerance) {
      out.converged = true;
      break;
    }
    if (outer == options.max_outer) break;

    const auto [c, s] = trig(theta);
    const Eigen::VectorXd sc = schur * c;
    const Eigen::VectorXd ss = schur * s;
    Eigen::MatrixXd h(nf, nf);
    for (int b = 0; b < nf; ++b) {
      const int jb = free_slots[b];
      for (int a = 0; a < nf; ++a) {
        const int ja = free_slots[a];
        h(a, b) = schur(ja, jb) * (s(ja) * s(jb) + c(ja) * c(jb));
      }
    }
    for (int a = 0; a < nf; ++a) {
      const int j = free_slots[a];
      h(a, a) += -c(j) * sc(j) - s(j) * ss(j) +
                 0.5 * (std::sin(gap(theta, j - 1)) + std::sin(gap(theta, j)));
      const int b = free_pos[(j + 1) % nb];
      if (b >= 0) {
        h(a, b) -= 0.5 * std::sin(gap(theta, j));
        h(b, a) -= 0.5 * std::sin(gap(theta, j));
      }
    }

    // Levenberg-damped Newton direction.
    Eigen::VectorXd d;
    double lambda = 0.0;
    const double diag_scale = std::max(1e-12, h.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h + lambda * Eigen::MatrixXd::Identity(nf, nf));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        d = -ldlt.solve(g);
        if (d.allFinite() && d.dot(g) < 0.0) break;
      }
      d.resize(0);
      lambda = lambda == 0.0 ? 1e-8 * diag_scale : 4.0 * lambda;
    }
    if (d.size() == 0) d = -g / diag_scale;

    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-14; alpha *= 0.5) {
      std::vector<double> trial = theta;
      for (int i = 0; i < nf; ++i) trial[free_slots[i]] += alpha * d(i);
      if (!monotone(trial)) continue;
      const double et = energy(trial);
      const bool armijo = et <= e + 1e-4 * alpha * g.dot(d);
      // Near the minimum the energy decrease drops below rounding; accept
      // steps that still shrink the gradient.
      const bool flat = et <= e + 1e-14 * std::abs(e) &&
                        gradient(trial).lpNorm<Eigen::Infinity>() < 0.5 * residual;
      if (armijo || flat) {
        theta = std::move(trial);
        e = et;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.theta = std::move(theta);
  return out;
}

}  // namespace

DiskDiffeo linear_beltrami_solve(std::shared_ptr<const TriMesh> mesh, const BeltramiField& mu,
                                 const BoundaryPolicy& policy,
                                 const BeltramiSolveOptions& options) {
  if (policy.kind == BoundaryPolicy::Kind::free) {
    throw UsageError("the Beltrami solve needs pinned boundary points");
  }
  if (static_cast<int>(mu.mu.size()) != mesh->triangle_count()) {
    throw UsageError("Beltrami field does not match the mesh");
  }
  if (mu.max_abs() > 1.0 - 1e-6) throw DomainError("|mu| must stay below 1");

  DiskDiffeo phi = DiskDiffeo::identity(mesh, policy);
  const int nb = static_cast<int>(mesh->boundary_loop.size());
  std::vector<int> free_slots;
  for (int j = 0; j < nb; ++j) {
    if (!phi.is_marked(j)) free_slots.push_back(j);
  }
  std::vector<double> theta0 = phi.angles();
  if (!options.initial_angles.empty()) {
    if (static_cast<int>(options.initial_angles.size()) != nb) {
      throw UsageError("initial angles do not match the boundary");
    }
    theta0 = options.initial_angles;
    for (int slot : phi.marked()) theta0[slot] = mesh->boundary_angle[slot];
    if (!monotone(theta0)) throw UsageError("initial angles are not increasing");
  }

  if (options.initial_angles.empty() && mesh->levels > kWarmStartLevel) {
    // Newton from the identity can slide into boundary collapse on fine
    // meshes; start from the coarse solution instead.
    auto coarse = build_disk_mesh(kWarmStartLevel);
    const TriangleLocator locator(*mesh, mesh->vertices);
    BeltramiField coarse_mu;
    for (const auto& tri : coarse->triangles) {
      const Vec2 centroid =
          (coarse->vertices[tri[0]] + coarse->vertices[tri[1]] + coarse->vertices[tri[2]]) / 3.0;
      coarse_mu.mu.push_back(mu.mu[locator.locate(centroid).first]);
    }
    try {
      const DiskDiffeo coarse_phi = linear_beltrami_solve(coarse, coarse_mu, policy, options);
      const int ratio = nb / static_cast<int>(coarse_phi.angles().size());
      std::vector<double> theta = refine_angles(coarse_phi.angles(), ratio);
      for (int slot : phi.marked()) theta[slot] = mesh->boundary_angle[slot];
      if (monotone(theta)) theta0 = std::move(theta);
    } catch (const Error&) {
      // fall back to the identity start
    }
  }

  auto system = std::make_unique<HarmonicSystem>(*mesh, mu, 1.0, options);
  AngleSolve solved = solve_angles(*system, free_slots, theta0, options);
  if (!solved.converged && options.continuation_steps > 0) {
    // Follow the solution from the identity (mu = 0) to the full field.
    std::vector<double> theta = phi.angles();
    AngleSolve step;
    for (int k = 1; k <= options.continuation_steps; ++k) {
      const double scale = static_cast<double>(k) / options.continuation_steps;
      auto scaled = k == options.continuation_steps
                        ? std::move(system)
                        : std::make_unique<HarmonicSystem>(*mesh, mu, scale, options);
      step = solve_angles(*scaled, free_slots, theta, options);
      if (!step.converged) break;
      theta = step.theta;
      if (k == options.continuation_steps) system = std::move(scaled);
    }
    if (step.converged) solved = std::move(step);
  }
  if (!solved.converged) {
    throw SolverError("boundary angle iteration did not converge", solved.history);
  }

  Eigen::MatrixXd b(nb, 2);
  for (int j = 0; j < nb; ++j) {
    b(j, 0) = std::cos(solved.theta[j]);
    b(j, 1) = std::sin(solved.theta[j]);
  }
  const Eigen::MatrixXd inner = system->extend(b);
  std::vector<Vec2> points = phi.positions();
  for (int v = 0; v < mesh->vertex_count(); ++v) {
    const int i = system->interior_index(v);
    if (i >= 0) points[v] = Vec2(inner(i, 0), inner(i, 1));
  }
  phi.set(std::move(points), std::move(solved.theta));
  phi.validate();
  return phi;
}

double beltrami_residual(const DiskDiffeo& phi, const BeltramiField& mu) {
  const TriMesh& mesh = phi.mesh();
  double num = 0.0;
  double den = 0.0;
  const std::complex<double> i(0.0, 1.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Matrix2d& j = phi.jacobian()[t];
    const std::complex<double> fx(j(0, 0), j(1, 0));
    const std::complex<double> fy(j(0, 1), j(1, 1));
    const std::complex<double> dz = 0.5 * (fx - i * fy);
    const std::complex<double> dzbar = 0.5 * (fx + i * fy);
    num += mesh.area[t] * std::norm(dzbar - mu.mu[t] * dz);
    den += mesh.area[t] * std::norm(dz);
  }
  return std::sqrt(num / den);
}

double energy_of_reparam(const SurfaceSample& s, const DiskDiffeo& phi) {
  const TriMesh& mesh = *s.mesh;
  if (&mesh != &phi.mesh()) throw UsageError("surface and reparameterization use different meshes");
  const Eigen::Matrix2d q = RotationQ::matrix();
  double e = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Matrix2d& j = phi.jacobian()[t];
    const double jac = j.row(0).dot(q * j.row(1).transpose());
    if (!(jac > 0.0)) {
      throw FoldError("reparameterization folds at triangle " + std::to_string(t), t);
    }
    double sum = 0.0;
    for (int a = 0; a < 3; ++a) {
      const Vec2 qu = q * s.grad[t].row(a).transpose();
      for (int b = 0; b < 2; ++b) {
        const double v = qu.dot(j.row(b).transpose());
        sum += 0.5 * v * v;
      }
    }
    e += mesh.area[t] * sum / jac;
  }
  return e;
}

namespace {

// Energy of reparameterization as a function of the movable degrees of
// freedom: interior image points, then free boundary angles.
class DescentProblem {
 public:
  DescentProblem(const SurfaceSample& s, const DiskDiffeo& base) : s_(s), base_(base) {
    const TriMesh& mesh = base.mesh();
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (!mesh.is_boundary(v)) interior_.push_back(v);
    }
    for (int j = 0; j < static_cast<int>(mesh.boundary_loop.size()); ++j) {
      if (!base.is_marked(j)) free_slots_.push_back(j);
    }
  }

  int size() const { return 2 * static_cast<int>(interior_.size()) + static_cast<int>(free_slots_.size()); }

  Eigen::VectorXd pack(const DiskDiffeo& phi) const {
    Eigen::VectorXd x(size());
    int k = 0;
    for (int v : interior_) {
      x(k++) = phi.positions()[v].x();
      x(k++) = phi.positions()[v].y();
    }
    for (int j : free_slots_) x(k++) = phi.angles()[j];
    return x;
  }

  void unpack(const Eigen::VectorXd& x, std::vector<Vec2>& points, std::vector<double>& angles) const {
    points = base_.positions();
    angles = base_.angles();
    int k = 0;
    for (int v : interior_) {
      points[v] = Vec2(x(k), x(k + 1));
      k += 2;
    }
    for (int j : free_slots_) angles[j] = x(k++);
    const TriMesh& mesh = base_.mesh();
    for (std::size_t j = 0; j < angles.size(); ++j) points[mesh.boundary_loop[j]] = on_circle(angles[j]);
  }

  DiskDiffeo make(const Eigen::VectorXd& x) const {
    std::vector<Vec2> points;
    std::vector<double> angles;
    unpack(x, points, angles);
    DiskDiffeo phi = base_;
    phi.set(std::move(points), std::move(angles));
    return phi;
  }

  // +inf outside the admissible set (folds or boundary disorder).
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    std::vector<Vec2> points;
    std::vector<double> angles;
    unpack(x, points, angles);
    if (!monotone(angles)) return kInf;
    const TriMesh& mesh = base_.mesh();
    std::vector<Vec2> gp(points.size(), Vec2::Zero());
    double e = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const Eigen::Matrix2d j = jacobian_of(mesh, points, t);
      const double det = j.determinant();
      if (!(det > 0.0)) return kInf;
      const Eigen::Matrix2d jinv = j.inverse();
      const Eigen::Matrix<double, 3, 2> a = s_.grad[t] * jinv;
      const double w = 0.5 * a.squaredNorm();
      e += mesh.area[t] * det * w;
      // d/dJ [det(J) W(F J^{-1})] = det(J) (W I - A^T A) J^{-T}
      const Eigen::Matrix2d dj = mesh.area[t] * det *
                                 (w * Eigen::Matrix2d::Identity() - a.transpose() * a) *
                                 jinv.transpose();
      const auto& tri = mesh.triangles[t];
      for (int c = 0; c < 3; ++c) gp[tri[c]] += dj * mesh.grad_lambda[t].row(c).transpose();
    }
    grad.resize(size());
    int k = 0;
    for (int v : interior_) {
      grad(k++) = gp[v].x();
      grad(k++) = gp[v].y();
    }
    for (int j : free_slots_) {
      const Vec2 tangent(-std::sin(angles[j]), std::cos(angles[j]));
      grad(k++) = gp[mesh.boundary_loop[j]].dot(tangent);
    }
    return e;
  }

 private:
  const SurfaceSample& s_;
  const DiskDiffeo& base_;
  std::vector<int> interior_;
  std::vector<int> free_slots_;
};

}  // namespace

DescentResult inner_variation_descent(const SurfaceSample& s, const DiskDiffeo& phi0, int iters,
                                      const DescentOptions& options) {
  if (s.mesh.get() != &phi0.mesh()) {
    throw UsageError("surface and reparameterization use different meshes");
  }
  phi0.validate();
  const DescentProblem problem(s, phi0);
  Eigen::VectorXd x = problem.pack(phi0);
  Eigen::VectorXd g;
  double f = problem.eval(x, g);
  DescentResult result{phi0, {f}, false, 0};
  if (problem.size() == 0) return result;

  // A first step moves vertices by a fraction of the mesh spacing.
  const double spacing = 1.0 / (1 << phi0.mesh().levels);
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  double steepest_alpha = -1.0;
  Eigen::VectorXd g_new;
  for (int it = 0; it < iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) break;
    Eigen::VectorXd d = -g;
    if (options.policy == StepPolicy::lbfgs && !memory.empty()) {
      std::vector<double> rho(memory.size());
      std::vector<double> alpha(memory.size());
      Eigen::VectorXd qv = g;
      for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
        rho[i] = 1.0 / memory[i].second.dot(memory[i].first);
        alpha[i] = rho[i] * memory[i].first.dot(qv);
        qv -= alpha[i] * memory[i].second;
      }
      const auto& [sl, yl] = memory.back();
      qv *= sl.dot(yl) / yl.squaredNorm();
      for (std::size_t i = 0; i < memory.size(); ++i) {
        const double beta = rho[i] * memory[i].second.dot(qv);
        qv += (alpha[i] - beta) * memory[i].first;
      }
      d = -qv;
      if (!(d.dot(g) < 0.0)) {
        memory.clear();
        d = -g;
      }
    }
    double alpha = 1.0;
    if (options.policy == StepPolicy::steepest && steepest_alpha > 0.0) {
      alpha = 2.0 * steepest_alpha;
    } else if (memory.empty()) {
      alpha = std::min(1.0, 0.1 * spacing / d.lpNorm<Eigen::Infinity>());
    }
    const double slope = g.dot(d);
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = f;
    for (; alpha * d.lpNorm<Eigen::Infinity>() > 1e-14; alpha *= 0.5) {
      x_new = x + alpha * d;
      f_new = problem.eval(x_new, g_new);
      if (f_new <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.stalled = true;
      break;
    }
    steepest_alpha = alpha;
    Eigen::VectorXd sv = x_new - x;
    Eigen::VectorXd yv = g_new - g;
    if (sv.dot(yv) > 1e-16 * sv.norm() * yv.norm()) {
      memory.emplace_back(std::move(sv), std::move(yv));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    x = std::move(x_new);
    g = g_new;
    f = f_new;
    result.history.push_back(f);
    result.iterations = it + 1;
  }
  result.phi = problem.make(x);
  return result;
}

DiskDiffeo prolongate(const DiskDiffeo& coarse, std::shared_ptr<const TriMesh> fine) {
  const TriMesh& cm = coarse.mesh();
  if (fine->levels < cm.levels) throw UsageError("prolongation needs a finer mesh");
  const int ratio = 1 << (fine->levels - cm.levels);
  DiskDiffeo phi = DiskDiffeo::identity(fine, coarse.policy());
  const TriangleLocator locator(cm, cm.vertices);
  std::vector<Vec2> points = fine->vertices;
  for (int v = 0; v < fine->vertex_count(); ++v) {
    if (fine->is_boundary(v)) continue;
    const auto [t, bary] = locator.locate(fine->vertices[v]);
    const auto& tri = cm.triangles[t];
    points[v] = bary(0) * coarse.positions()[tri[0]] + bary(1) * coarse.positions()[tri[1]] +
                bary(2) * coarse.positions()[tri[2]];
  }
  std::vector<double> theta = refine_angles(coarse.angles(), ratio);
  for (int slot : phi.marked()) theta[slot] = fine->boundary_angle[slot];
  phi.set(std::move(points), std::move(theta));
  phi.validate();
  return phi;
}

double conformality_defect(const SurfaceSample& s, const DiskDiffeo& phi) {
  const TriMesh& mesh = *s.mesh;
  double num = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Matrix2d c = cofactor2(phi.jacobian()[t]);
    const Eigen::Matrix2d m = c * s.gram[t] * c.transpose();
    num += mesh.area[t] * (m / m.trace() - 0.5 * Eigen::Matrix2d::Identity()).norm();
  }
  return num / mesh.total_area();
}

DiskDiffeo random_diffeo(std::shared_ptr<const TriMesh> mesh, const BoundaryPolicy& policy,
                         double magnitude, std::uint64_t seed) {
  DiskDiffeo phi = DiskDiffeo::identity(mesh, policy);
  if (magnitude == 0.0) return phi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
  struct Mode {
    double amp;
    double phase;
  };
  auto draw = [&] {
    std::array<Mode, 3> modes{};
    for (auto& m : modes) m = {coef(rng), phase(rng)};
    return modes;
  };
  const auto radial = draw();
  const auto twist = draw();
  const auto slide = draw();
  auto sum = [](const std::array<Mode, 3>& modes, double theta) {
    double v = 0.0;
    for (int k = 0; k < 3; ++k) v += modes[k].amp * std::sin((k + 1) * theta + modes[k].phase);
    return v;
  };
  std::vector<double> pins;
  for (int slot : phi.marked()) pins.push_back(mesh->boundary_angle[slot]);
  auto boundary_factor = [&](double theta) {
    if (policy.kind == BoundaryPolicy::Kind::fixed_boundary) return 0.0;
    double f = 1.0;
    for (double p : pins) {
      const double sn = std::sin(0.5 * (theta - p));
      f *= sn * sn;
    }
    return f;
  };

  for (double m = magnitude; m > 1e-6 * magnitude; m *= 0.5) {
    std::vector<Vec2> points = mesh->vertices;
    for (int v = 0; v < mesh->vertex_count(); ++v) {
      if (mesh->is_boundary(v)) continue;
      const double r = mesh->vertices[v].norm();
      const double theta = std::atan2(mesh->vertices[v].y(), mesh->vertices[v].x());
      const double r2 = r * r;
      const double rr = r + m * r2 * (1.0 - r) * sum(radial, theta);
      const double tt = theta + m * (r2 * boundary_factor(theta) * sum(slide, theta) +
                                     r2 * (1.0 - r2) * sum(twist, theta));
      points[v] = rr * on_circle(tt);
    }
    std::vector<double> angles = mesh->boundary_angle;
    for (int j = 0; j < static_cast<int>(angles.size()); ++j) {
      if (phi.is_marked(j)) continue;
      angles[j] += m * boundary_factor(angles[j]) * sum(slide, angles[j]);
    }
    DiskDiffeo trial = phi;
    trial.set(std::move(points), std::move(angles));
    if (trial.angles_monotone() && trial.min_det() > 0.0) return trial;
  }
  return phi;
}

DiskDiffeo radial_stretch_diffeo(std::shared_ptr<const TriMesh> mesh, double strength) {
  if (!(std::abs(strength) < 1.0)) throw DomainError("radial stretch strength must be in (-1, 1)");
  DiskDiffeo phi = DiskDiffeo::identity(mesh, BoundaryPolicy::three_point());
  std::vector<Vec2> points = mesh->vertices;
  for (auto& p : points) p *= 1.0 + strength * (1.0 - p.norm());
  phi.set(std::move(points), mesh->boundary_angle);
  phi.validate();
  return phi;
}

SurfaceSample pullback(const SurfaceMap& u, const DiskDiffeo& phi) {
  const TriMesh& mesh = phi.mesh();
  const int nb = static_cast<int>(mesh.boundary_loop.size());
  const TriangleLocator locator(mesh, phi.positions());
  std::vector<Vec3> values(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    Vec2 y;
    if (mesh.is_boundary(v)) {
      // Invert the boundary correspondence angle by angle.
      const auto& th = phi.angles();
      double alpha = mesh.boundary_angle[mesh.boundary_index[v]];
      while (alpha < th[0]) alpha += 2.0 * pi;
      while (alpha >= th[0] + 2.0 * pi) alpha -= 2.0 * pi;
      int j = static_cast<int>(std::upper_bound(th.begin(), th.end(), alpha) - th.begin()) - 1;
      j = std::clamp(j, 0, nb - 1);
      const double next = j + 1 < nb ? th[j + 1] : th[0] + 2.0 * pi;
      const double w = (alpha - th[j]) / (next - th[j]);
      const double a0 = mesh.boundary_angle[j];
      const double a1 = j + 1 < nb ? mesh.boundary_angle[j + 1] : mesh.boundary_angle[0] + 2.0 * pi;
      y = on_circle(a0 + w * (a1 - a0));
    } else {
      y = locator.source_point(mesh.vertices[v]);
    }
    values[v] = u(y);
  }
  return surface_from_values(phi.mesh_ptr(), std::move(values));
}

}  // namespace invhull
