#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace invhull {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Grad32 = Eigen::Matrix<double, 3, 2>;  // rows: barycentric gradients / grad u

// Triangulated unit disk. Vertices on ring k of K = 2^levels rings sit at
// radius k/K, 6k per ring; ring K is the boundary loop on the unit circle.
struct TriMesh {
  int levels = 0;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> boundary_loop;              // counterclockwise order
  std::vector<double> boundary_angle;          // angle of boundary_loop[i]
  std::vector<int> boundary_index;             // per vertex: slot in boundary_loop or -1

  // Derived per-triangle data.
  std::vector<double> area;
  std::vector<Grad32> grad_lambda;  // row v = gradient of the hat function of corner v

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  bool is_boundary(int v) const { return boundary_index[v] >= 0; }
  double signed_area(int t) const;
  int euler_characteristic() const;
  double total_area() const;
  // Throws RegularityError if any TriMesh invariant fails.
  void validate() const;
};

std::shared_ptr<const TriMesh> build_disk_mesh(int levels);

// Signed area and hat-function gradients of the triangle (p0, p1, p2).
double triangle_signed_area(const Vec2& p0, const Vec2& p1, const Vec2& p2);
Grad32 hat_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2);

using SurfaceMap = std::function<Vec3(const Vec2&)>;

// "flat", "stretch:a,b", "graph:sin:amplitude" (x1, x2, a sin(pi x1) sin(pi x2)).
// Throws UsageError.
SurfaceMap make_builtin_surface(const std::string& spec);

// Per-vertex embedding u : disk -> R^3 with its P1 gradients and metrics.
struct SurfaceSample {
  std::shared_ptr<const TriMesh> mesh;
  std::vector<Vec3> values;
  std::vector<Grad32> grad;            // per triangle, 3 x 2
  std::vector<Eigen::Matrix2d> gram;   // per triangle, grad^T grad

  bool is_regular() const;
};

SurfaceSample sample_surface(std::shared_ptr<const TriMesh> mesh, const SurfaceMap& u);
// Throws UsageError on size mismatch or non-finite values.
SurfaceSample surface_from_values(std::shared_ptr<const TriMesh> mesh,
                                  std::vector<Vec3> values);

// sum_T area(T) |grad u_T|^2 / 2
double dirichlet_energy(const SurfaceSample& s);
// sum_T area(T) sqrt(det Gram_T)
double area_functional(const SurfaceSample& s);

struct EnergyLevel {
  int level = 0;
  double dirichlet = 0.0;
  double area = 0.0;
};

struct EnergyReport {
  double dirichlet = 0.0;
  double area = 0.0;
  double gap = 0.0;  // dirichlet - area
  std::vector<EnergyLevel> history;
};

EnergyReport energy_report(const SurfaceSample& s);
// Dirichlet energy and area of u sampled at each level in [first, last];
// the top-level fields describe the finest level.
EnergyReport refinement_study(const SurfaceMap& u, int first, int last);

// ASCII OFF (z = 0) and OBJ with 3D positions.
void write_off(const TriMesh& mesh, const std::string& path);
void write_obj(const SurfaceSample& s, const std::string& path);

}  // namespace invhull
