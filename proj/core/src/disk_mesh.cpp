#include "invhull/disk_mesh.hpp"

#include "invhull/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace invhull {

double triangle_signed_area(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const Vec2 e1 = p1 - p0;
  const Vec2 e2 = p2 - p0;
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Grad32 hat_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  Eigen::Matrix2d j;
  j.col(0) = p1 - p0;
  j.col(1) = p2 - p0;
  const Eigen::Matrix2d jinv = j.inverse();
  Grad32 g;
  g.row(1) = jinv.row(0);
  g.row(2) = jinv.row(1);
  g.row(0) = -g.row(1) - g.row(2);
  return g;
}

double TriMesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  return triangle_signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

int TriMesh::euler_characteristic() const {
  std::set<std::pair<int, int>> edges;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return vertex_count() - static_cast<int>(edges.size()) + triangle_count();
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (double a : area) s += a;
  return s;
}

void TriMesh::validate() const {
  for (int t = 0; t < triangle_count(); ++t) {
    if (!(signed_area(t) > 0.0)) {
      throw RegularityError("mesh triangle " + std::to_string(t) +
                            " is not positively oriented");
    }
  }
  for (int v : boundary_loop) {
    if (std::abs(vertices[v].norm() - 1.0) > 1e-12) {
      throw RegularityError("boundary vertex off the unit circle");
    }
  }
  if (euler_characteristic() != 1) {
    throw RegularityError("mesh is not a topological disk");
  }
}

std::shared_ptr<const TriMesh> build_disk_mesh(int levels) {
  using std::numbers::pi;
  if (levels < 0 || levels > 10) throw UsageError("mesh levels must be in 0..10");
  auto mesh = std::make_shared<TriMesh>();
  mesh->levels = levels;
  const int rings = 1 << levels;

  // ring_start[k] = index of the first vertex on ring k
  std::vector<int> ring_start(rings + 2);
  mesh->vertices.push_back(Vec2::Zero());
  ring_start[0] = 0;
  ring_start[1] = 1;
  for (int k = 1; k <= rings; ++k) {
    const int count = 6 * k;
    const double radius = static_cast<double>(k) / rings;
    for (int j = 0; j < count; ++j) {
      const double a = 2.0 * pi * j / count;
      if (k == rings) {
        mesh->vertices.emplace_back(std::cos(a), std::sin(a));
      } else {
        mesh->vertices.emplace_back(radius * std::cos(a), radius * std::sin(a));
      }
    }
    ring_start[k + 1] = ring_start[k] + count;
  }

  for (int j = 0; j < 6; ++j) {
    mesh->triangles.push_back({0, 1 + j, 1 + (j + 1) % 6});
  }
  // Zip ring k-1 to ring k, always advancing along whichever ring has the
  // smaller next angle.
  for (int k = 2; k <= rings; ++k) {
    const int n_in = 6 * (k - 1);
    const int n_out = 6 * k;
    auto inner = [&](int i) { return ring_start[k - 1] + (i % n_in); };
    auto outer = [&](int j) { return ring_start[k] + (j % n_out); };
    int i = 0;
    int j = 0;
    while (i < n_in || j < n_out) {
      const double next_in = (i < n_in) ? static_cast<double>(i + 1) / n_in : 2.0;
      const double next_out = (j < n_out) ? static_cast<double>(j + 1) / n_out : 2.0;
      if (next_out <= next_in) {
        mesh->triangles.push_back({inner(i), outer(j), outer(j + 1)});
        ++j;
      } else {
        mesh->triangles.push_back({inner(i), outer(j), inner(i + 1)});
        ++i;
      }
    }
  }

  mesh->boundary_index.assign(mesh->vertices.size(), -1);
  const int n_bd = 6 * rings;
  for (int j = 0; j < n_bd; ++j) {
    const int v = ring_start[rings] + j;
    mesh->boundary_index[v] = j;
    mesh->boundary_loop.push_back(v);
    mesh->boundary_angle.push_back(2.0 * pi * j / n_bd);
  }

  for (const auto& tri : mesh->triangles) {
    const Vec2& p0 = mesh->vertices[tri[0]];
    const Vec2& p1 = mesh->vertices[tri[1]];
    const Vec2& p2 = mesh->vertices[tri[2]];
    mesh->area.push_back(triangle_signed_area(p0, p1, p2));
    mesh->grad_lambda.push_back(hat_gradients(p0, p1, p2));
  }
  mesh->validate();
  return mesh;
}

SurfaceMap make_builtin_surface(const std::string& spec) {
  using std::numbers::pi;
  auto numbers_after = [&](const std::string& prefix) {
    std::vector<double> out;
    std::stringstream ss(spec.substr(prefix.size()));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw UsageError("malformed surface '" + spec + "'");
      }
    }
    return out;
  };
  if (spec == "flat") {
    return [](const Vec2& x) { return Vec3(x.x(), x.y(), 0.0); };
  }
  if (spec.rfind("stretch:", 0) == 0) {
    const auto p = numbers_after("stretch:");
    if (p.size() != 2) throw UsageError("surface 'stretch' needs a,b");
    const double a = p[0];
    const double b = p[1];
    return [a, b](const Vec2& x) { return Vec3(a * x.x(), b * x.y(), 0.0); };
  }
  if (spec.rfind("graph:sin:", 0) == 0) {
    const auto p = numbers_after("graph:sin:");
    if (p.size() != 1) throw UsageError("surface 'graph:sin' needs an amplitude");
    const double a = p[0];
    return [a](const Vec2& x) {
      return Vec3(x.x(), x.y(), a * std::sin(pi * x.x()) * std::sin(pi * x.y()));
    };
  }
  throw UsageError("unknown surface '" + spec + "'");
}

bool SurfaceSample::is_regular() const {
  for (const auto& g : gram) {
    if (!(g.determinant() > 1e-14 * std::max(1.0, g.trace() * g.trace()))) return false;
  }
  return true;
}

SurfaceSample surface_from_values(std::shared_ptr<const TriMesh> mesh,
                                  std::vector<Vec3> values) {
  if (static_cast<int>(values.size()) != mesh->vertex_count()) {
    throw UsageError("surface values do not match the mesh");
  }
  for (const auto& v : values) {
    if (!v.allFinite()) throw UsageError("surface has non-finite values");
  }
  SurfaceSample s;
  s.values = std::move(values);
  s.grad.resize(mesh->triangle_count());
  s.gram.resize(mesh->triangle_count());
  for (int t = 0; t < mesh->triangle_count(); ++t) {
    const auto& tri = mesh->triangles[t];
    const Grad32& gl = mesh->grad_lambda[t];
    Grad32 g = Grad32::Zero();
    for (int c = 0; c < 3; ++c) g += s.values[tri[c]] * gl.row(c);
    s.grad[t] = g;
    s.gram[t] = g.transpose() * g;
  }
  s.mesh = std::move(mesh);
  return s;
}

SurfaceSample sample_surface(std::shared_ptr<const TriMesh> mesh, const SurfaceMap& u) {
  std::vector<Vec3> values;
  values.reserve(mesh->vertex_count());
  for (const auto& x : mesh->vertices) values.push_back(u(x));
  return surface_from_values(std::move(mesh), std::move(values));
}

double dirichlet_energy(const SurfaceSample& s) {
  double e = 0.0;
  for (std::size_t t = 0; t < s.grad.size(); ++t) {
    e += s.mesh->area[t] * 0.5 * s.grad[t].squaredNorm();
  }
  return e;
}

double area_functional(const SurfaceSample& s) {
  double a = 0.0;
  for (std::size_t t = 0; t < s.gram.size(); ++t) {
    a += s.mesh->area[t] * std::sqrt(std::max(0.0, s.gram[t].determinant()));
  }
  return a;
}

EnergyReport energy_report(const SurfaceSample& s) {
  EnergyReport r;
  r.dirichlet = dirichlet_energy(s);
  r.area = area_functional(s);
  r.gap = r.dirichlet - r.area;
  r.history.push_back({s.mesh->levels, r.dirichlet, r.area});
  return r;
}

EnergyReport refinement_study(const SurfaceMap& u, int first, int last) {
  EnergyReport r;
  for (int level = first; level <= last; ++level) {
    const SurfaceSample s = sample_surface(build_disk_mesh(level), u);
    r.dirichlet = dirichlet_energy(s);
    r.area = area_functional(s);
    r.gap = r.dirichlet - r.area;
    r.history.push_back({level, r.dirichlet, r.area});
  }
  return r;
}

void write_off(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(17);
  out << "OFF\n" << mesh.vertex_count() << " " << mesh.triangle_count() << " 0\n";
  for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << " 0\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

void write_obj(const SurfaceSample& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(17);
  for (const auto& v : s.values) out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : s.mesh->triangles) {
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  }
}

}  // namespace invhull
