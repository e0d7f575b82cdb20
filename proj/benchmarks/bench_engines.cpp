#include "invhull/curve.hpp"
#include "invhull/density.hpp"
#include "invhull/disk_mesh.hpp"
#include "invhull/hull1d.hpp"
#include "invhull/pointwise_hull.hpp"
#include "invhull/reparam2d.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace invhull;

namespace {

MatrixF random_matrix(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  MatrixF f(m, n);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = z(rng);
  return f;
}

void BM_Hull1DClosedForm(benchmark::State& state) {
  const SampledCurve u = random_smooth_curve(kDefaultSeed, static_cast<int>(state.range(0)));
  const Density w = make_density("ppower:3");
  for (auto _ : state) benchmark::DoNotOptimize(invariant_hull_1d(w, u).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hull1DClosedForm)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_DirectMinimize(benchmark::State& state) {
  const SampledCurve u = random_smooth_curve(kDefaultSeed, 256);
  const Density w = make_density("quadratic");
  for (auto _ : state) benchmark::DoNotOptimize(direct_minimize_reparam(w, u, 2000, kDefaultSeed).value);
}
BENCHMARK(BM_DirectMinimize)->Unit(benchmark::kMillisecond);

void BM_PointwiseHull(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Density w = make_density("wn:" + std::to_string(n));
  const MatrixF f = random_matrix(n + 1, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(pointwise_hull(w, f).value);
}
BENCHMARK(BM_PointwiseHull)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ClosedFormX(benchmark::State& state) {
  const MatrixF f = random_matrix(4, 3, 5);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_X_closed_form(f).det());
}
BENCHMARK(BM_ClosedFormX);

void BM_BuildMesh(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_disk_mesh(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BuildMesh)->DenseRange(3, 7)->Unit(benchmark::kMillisecond);

void BM_SurfaceEnergies(benchmark::State& state) {
  const auto mesh = build_disk_mesh(static_cast<int>(state.range(0)));
  const SurfaceMap u = make_builtin_surface("graph:sin:0.3");
  for (auto _ : state) {
    const SurfaceSample s = sample_surface(mesh, u);
    benchmark::DoNotOptimize(dirichlet_energy(s) + area_functional(s));
  }
}
BENCHMARK(BM_SurfaceEnergies)->DenseRange(3, 7)->Unit(benchmark::kMillisecond);

void BM_LinearBeltramiSolve(benchmark::State& state) {
  const auto mesh = build_disk_mesh(static_cast<int>(state.range(0)));
  const SurfaceSample s = sample_surface(mesh, make_builtin_surface("stretch:2,1"));
  const BeltramiField mu = beltrami_coefficient(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(linear_beltrami_solve(mesh, mu, BoundaryPolicy::three_point()).min_det());
  }
}
BENCHMARK(BM_LinearBeltramiSolve)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_Descent(benchmark::State& state) {
  const auto mesh = build_disk_mesh(static_cast<int>(state.range(0)));
  const SurfaceSample s = sample_surface(mesh, make_builtin_surface("stretch:2,1"));
  const DiskDiffeo id = DiskDiffeo::identity(mesh, BoundaryPolicy::three_point());
  for (auto _ : state) benchmark::DoNotOptimize(inner_variation_descent(s, id, 100).history.back());
}
BENCHMARK(BM_Descent)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_EnergyOfReparam(benchmark::State& state) {
  const auto mesh = build_disk_mesh(static_cast<int>(state.range(0)));
  const SurfaceSample s = sample_surface(mesh, make_builtin_surface("graph:sin:0.3"));
  const DiskDiffeo phi = random_diffeo(mesh, BoundaryPolicy::three_point(), 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(energy_of_reparam(s, phi));
}
BENCHMARK(BM_EnergyOfReparam)->DenseRange(4, 7);

}  // namespace

BENCHMARK_MAIN();
