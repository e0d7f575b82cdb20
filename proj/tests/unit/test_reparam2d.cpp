#include "invhull/disk_mesh.hpp"
#include "invhull/errors.hpp"
#include "invhull/reparam2d.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace invhull;
using oracle::kPi;

namespace {

// sum_T area det(J) |grad u J^{-1}|^2 / 2, the change-of-variables form.
double change_of_variables_energy(const SurfaceSample& s, const DiskDiffeo& phi) {
  double e = 0.0;
  for (int t = 0; t < s.mesh->triangle_count(); ++t) {
    const Eigen::Matrix2d& j = phi.jacobian()[t];
    const Eigen::Matrix<double, 3, 2> a = s.grad[t] * j.inverse();
    e += s.mesh->area[t] * j.determinant() * 0.5 * a.squaredNorm();
  }
  return e;
}

}  // namespace

TEST_CASE("rotation Q") {
  const Eigen::Matrix2d q = RotationQ::matrix();
  CHECK((q.transpose() + q).norm() == 0.0);
  CHECK((q * q + Eigen::Matrix2d::Identity()).norm() == 0.0);
}

TEST_CASE("Beltrami coefficient examples") {
  const auto m = build_disk_mesh(2);
  const auto mu_of = [&](const char* id) { return beltrami_coefficient(sample_surface(m, make_builtin_surface(id))); };
  for (const auto& z : mu_of("flat").mu) CHECK(std::abs(z) < 1e-15);
  for (const auto& z : mu_of("stretch:2,1").mu) CHECK(std::abs(z - 1.0 / 3.0) < 1e-14);
  for (const auto& z : mu_of("stretch:1,2").mu) CHECK(std::abs(z + 1.0 / 3.0) < 1e-14);
  CHECK(mu_of("graph:sin:0.6").max_abs() < 1.0);
  const SurfaceSample rank1 = sample_surface(m, [](const Vec2& x) { return Vec3(x.x(), 2 * x.x(), 0); });
  CHECK_THROWS_AS(beltrami_coefficient(rank1), RegularityError);
}

TEST_CASE("Beltrami coefficient of a shear is complex") {
  // u = (x + a y, y): E = 1, F = a, G = 1 + a^2.
  const double a = 0.4;
  const auto m = build_disk_mesh(1);
  const SurfaceSample s = sample_surface(m, [&](const Vec2& x) { return Vec3(x.x() + a * x.y(), x.y(), 0); });
  const double e = 1.0;
  const double f = a;
  const double g = 1 + a * a;
  const std::complex<double> want(e - g, 2 * f);
  const std::complex<double> mu = want / (e + g + 2 * std::sqrt(e * g - f * f));
  for (const auto& z : beltrami_coefficient(s).mu) CHECK(std::abs(z - mu) < 1e-14);
}

TEST_CASE("coefficient matrix") {
  const Eigen::Matrix2d zero = beltrami_coefficient_matrix(0.0);
  CHECK((zero - Eigen::Matrix2d::Identity()).norm() < 1e-15);
  // For G = diag(4, 1): sqrt(det G) G^{-1} = diag(1/2, 2).
  const Eigen::Matrix2d s = beltrami_coefficient_matrix(1.0 / 3.0);
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(1, 1) == doctest::Approx(2.0));
  CHECK(std::abs(s(0, 1)) < 1e-15);
  CHECK(beltrami_coefficient_matrix({0.2, -0.5}).determinant() == doctest::Approx(1.0));
}

TEST_CASE("identity diffeo and policies") {
  const auto m = build_disk_mesh(3);
  const DiskDiffeo id = DiskDiffeo::identity(m, BoundaryPolicy::three_point());
  CHECK(id.marked().size() == 3);
  CHECK(id.min_det() == doctest::Approx(1.0));
  CHECK(id.angles_monotone());
  CHECK_NOTHROW(id.validate());
  // Pins at 0, 2 pi / 3, 4 pi / 3 fall on boundary slots.
  for (int slot : id.marked()) {
    const double a = m->boundary_angle[slot];
    CHECK(std::abs(std::remainder(a, 2 * kPi / 3)) < 1e-12);
  }
  CHECK(DiskDiffeo::identity(m, BoundaryPolicy::fixed_boundary()).marked().size() == m->boundary_loop.size());
  CHECK(DiskDiffeo::identity(m, BoundaryPolicy::free()).marked().empty());
}

TEST_CASE("folded maps are rejected") {
  const auto m = build_disk_mesh(2);
  DiskDiffeo phi = DiskDiffeo::identity(m, BoundaryPolicy::three_point());
  auto pts = phi.positions();
  // Move the centre vertex far past its neighbours.
  pts[0] = Vec2(0.9, 0.0);
  phi.set(pts, phi.angles());
  CHECK(phi.min_det() <= 0.0);
  CHECK_THROWS_AS(phi.validate(), FoldError);
  const SurfaceSample s = sample_surface(m, make_builtin_surface("flat"));
  CHECK_THROWS_AS(energy_of_reparam(s, phi), FoldError);
}

TEST_CASE("energy of the identity is the Dirichlet energy") {
  const auto m = build_disk_mesh(3);
  for (const char* id : {"flat", "stretch:2,1", "graph:sin:0.6"}) {
    const SurfaceSample s = sample_surface(m, make_builtin_surface(id));
    CHECK(energy_of_reparam(s, DiskDiffeo::identity(m, BoundaryPolicy::three_point())) ==
          doctest::Approx(dirichlet_energy(s)).epsilon(1e-13));
  }
}

TEST_CASE("energy formula agrees with the change of variables") {
  const auto m = build_disk_mesh(3);
  const SurfaceSample s = sample_surface(m, make_builtin_surface("graph:sin:0.6"));
  for (int k = 0; k < 5; ++k) {
    const DiskDiffeo phi = random_diffeo(m, BoundaryPolicy::three_point(), 0.15, 100 + k);
    CHECK(energy_of_reparam(s, phi) == doctest::Approx(change_of_variables_energy(s, phi)).epsilon(1e-12));
  }
}

TEST_CASE("flat disk energy is bounded below by its area") {
  const auto m = build_disk_mesh(4);
  const SurfaceSample s = sample_surface(m, make_builtin_surface("flat"));
  for (int k = 0; k < 5; ++k) {
    const DiskDiffeo phi = random_diffeo(m, BoundaryPolicy::three_point(), 0.1, 200 + k);
    CHECK(energy_of_reparam(s, phi) >= kPi * 0.98);
    CHECK(energy_of_reparam(s, phi) >= area_functional(s) * (1 - 1e-12));
  }
}

TEST_CASE("conformality defect examples") {
  const auto m = build_disk_mesh(2);
  const DiskDiffeo id = DiskDiffeo::identity(m, BoundaryPolicy::three_point());
  CHECK(conformality_defect(sample_surface(m, make_builtin_surface("flat")), id) < 1e-15);
  CHECK(conformality_defect(sample_surface(m, make_builtin_surface("stretch:2,1")), id) ==
        doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("random diffeo contract") {
  const auto m = build_disk_mesh(4);
  const DiskDiffeo zero = random_diffeo(m, BoundaryPolicy::three_point(), 0.0, 1);
  for (int v = 0; v < m->vertex_count(); ++v) CHECK((zero.positions()[v] - m->vertices[v]).norm() == 0.0);
  const DiskDiffeo phi = random_diffeo(m, BoundaryPolicy::three_point(), 0.05, 2);
  CHECK(phi.min_det() > 0.0);
  CHECK(phi.angles_monotone());
  for (int slot : phi.marked()) CHECK(phi.angles()[slot] == m->boundary_angle[slot]);
  for (int v : m->boundary_loop) CHECK(std::abs(phi.positions()[v].norm() - 1.0) < 1e-12);
  const DiskDiffeo big = random_diffeo(m, BoundaryPolicy::free(), 5.0, 3);
  CHECK(big.min_det() > 0.0);
}

TEST_CASE("radial stretch changes the Dirichlet energy but not the area") {
  const auto m = build_disk_mesh(4);
  const SurfaceMap u = make_builtin_surface("flat");
  const SurfaceSample s = sample_surface(m, u);
  const SurfaceSample t = pullback(u, radial_stretch_diffeo(m, 0.5));
  CHECK(std::abs(dirichlet_energy(t) - dirichlet_energy(s)) > 0.05 * dirichlet_energy(s));
  CHECK(area_functional(t) == doctest::Approx(area_functional(s)).epsilon(1e-3));
}

TEST_CASE("Beltrami solve with mu = 0 is the identity") {
  const auto m = build_disk_mesh(3);
  const BeltramiField zero = BeltramiField::constant(m->triangle_count(), 0.0);
  const DiskDiffeo phi = linear_beltrami_solve(m, zero, BoundaryPolicy::three_point());
  for (int v = 0; v < m->vertex_count(); ++v) CHECK((phi.positions()[v] - m->vertices[v]).norm() < 1e-8);
  CHECK(beltrami_residual(phi, zero) < 1e-6);
  BeltramiSolveOptions cg;
  cg.solver = LinearSolver::cg;
  const DiskDiffeo psi = linear_beltrami_solve(m, zero, BoundaryPolicy::three_point(), cg);
  for (int v = 0; v < m->vertex_count(); ++v) CHECK((psi.positions()[v] - m->vertices[v]).norm() < 1e-8);
}

TEST_CASE("Beltrami solve recovers a piecewise-linear map from its metric") {
  const auto m = build_disk_mesh(3);
  const DiskDiffeo psi = random_diffeo(m, BoundaryPolicy::three_point(), 0.1, 7);
  std::vector<Vec3> values;
  for (const auto& p : psi.positions()) values.emplace_back(p.x(), p.y(), 0.0);
  const BeltramiField mu = beltrami_coefficient(surface_from_values(m, values));
  const DiskDiffeo phi = linear_beltrami_solve(m, mu, BoundaryPolicy::three_point());
  for (int v = 0; v < m->vertex_count(); ++v) CHECK((phi.positions()[v] - psi.positions()[v]).norm() < 1e-8);
  CHECK(beltrami_residual(phi, mu) < 1e-6);
}

TEST_CASE("Beltrami residual for constant mu decays with the mesh size") {
  double prev = 1.0;
  for (int level : {2, 3, 4}) {
    const auto m = build_disk_mesh(level);
    const BeltramiField mu = BeltramiField::constant(m->triangle_count(), 1.0 / 3.0);
    const double r = beltrami_residual(linear_beltrami_solve(m, mu, BoundaryPolicy::three_point()), mu);
    CHECK(r < 0.75 * prev);
    prev = r;
  }
}

TEST_CASE("Beltrami solve straightens the linear stretch") {
  const auto m = build_disk_mesh(4);
  const SurfaceSample s = sample_surface(m, make_builtin_surface("stretch:2,1"));
  const DiskDiffeo phi = linear_beltrami_solve(m, beltrami_coefficient(s), BoundaryPolicy::three_point());
  CHECK(phi.min_det() > 0.0);
  CHECK(std::abs(energy_of_reparam(s, phi) - 2 * kPi) < 0.03 * 2 * kPi);
  CHECK(conformality_defect(s, phi) < conformality_defect(s, DiskDiffeo::identity(m, BoundaryPolicy::three_point())));
}

TEST_CASE("Beltrami solve rejects the free policy") {
  const auto m = build_disk_mesh(1);
  CHECK_THROWS_AS(linear_beltrami_solve(m, BeltramiField::constant(m->triangle_count(), 0.0), BoundaryPolicy::free()),
                  UsageError);
}

TEST_CASE("descent on the flat disk stays put") {
  const auto m = build_disk_mesh(3);
  const SurfaceSample s = sample_surface(m, make_builtin_surface("flat"));
  const DescentResult r = inner_variation_descent(s, DiskDiffeo::identity(m, BoundaryPolicy::three_point()), 50);
  CHECK(r.history.front() == doctest::Approx(r.history.back()).epsilon(1e-12));
}

TEST_CASE("descent is monotone and lowers the defect") {
  const auto m = build_disk_mesh(3);
  const SurfaceSample s = sample_surface(m, make_builtin_surface("stretch:2,1"));
  const DiskDiffeo id = DiskDiffeo::identity(m, BoundaryPolicy::three_point());
  for (StepPolicy p : {StepPolicy::lbfgs, StepPolicy::steepest}) {
    DescentOptions o;
    o.policy = p;
    const DescentResult r = inner_variation_descent(s, id, 200, o);
    for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
    CHECK(r.history.back() < r.history.front());
    CHECK(r.history.back() >= area_functional(s) * (1 - 1e-12));
    CHECK(conformality_defect(s, r.phi) < conformality_defect(s, id));
    CHECK_NOTHROW(r.phi.validate());
  }
}

TEST_CASE("prolongation preserves the map") {
  const auto coarse = build_disk_mesh(2);
  const auto fine = build_disk_mesh(4);
  const DiskDiffeo phi = random_diffeo(coarse, BoundaryPolicy::three_point(), 0.1, 9);
  const DiskDiffeo up = prolongate(phi, fine);
  CHECK_NOTHROW(up.validate());
  // Coarse vertices are fine vertices at the same positions.
  for (int v = 0; v < coarse->vertex_count(); ++v) {
    for (int w = 0; w < fine->vertex_count(); ++w) {
      if ((fine->vertices[w] - coarse->vertices[v]).norm() < 1e-12) {
        CHECK((up.positions()[w] - phi.positions()[v]).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("pullback by the identity reproduces the samples") {
  const auto m = build_disk_mesh(3);
  const SurfaceMap u = make_builtin_surface("graph:sin:0.3");
  const SurfaceSample a = sample_surface(m, u);
  const SurfaceSample b = pullback(u, DiskDiffeo::identity(m, BoundaryPolicy::three_point()));
  for (int v = 0; v < m->vertex_count(); ++v) CHECK((a.values[v] - b.values[v]).norm() < 1e-12);
}
