#pragma once

#include "invhull/hull1d.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace invhull::cli {

enum class Command { hull1d, pointwise, surface, verify };
enum class SurfaceMethod { lbs, descent, both };

std::string to_string(Command command);
std::string to_string(SurfaceMethod method);
// Throws UsageError.
SurfaceMethod parse_method(const std::string& text);

struct RunConfig {
  Command command = Command::hull1d;
  std::string density = "quadratic";
  std::string curve = "parabola";  // built-in id or CSV path
  std::string matrix;              // "a,b;c,d;e,f"
  std::string surface = "flat";

  int n = 1024;
  int levels = 4;
  int starts = 12;
  int iters = 2000;
  int probe_j_max = 50;
  double perturb = 0.0;  // magnitude of a random initial diffeomorphism for descent
  SurfaceMethod method = SurfaceMethod::both;
  std::uint64_t seed = kDefaultSeed;

  std::optional<std::string> report_path;
  std::optional<std::string> svg_path;
  std::optional<std::string> csv_path;   // probe values or refinement sweep
  std::optional<std::string> mesh_path;  // OFF export of the mesh
  std::optional<std::string> obj_path;   // OBJ export of the surface

  // Rejects unknown densities, malformed matrices and out-of-range knobs
  // before any computation. Throws UsageError.
  void validate() const;
};

}  // namespace invhull::cli
