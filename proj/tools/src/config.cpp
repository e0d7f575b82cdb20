#include "invhull_cli/config.hpp"

#include "invhull/density.hpp"
#include "invhull/disk_mesh.hpp"
#include "invhull/errors.hpp"

namespace invhull::cli {

std::string to_string(Command command) {
  switch (command) {
    case Command::hull1d:
      return "hull1d";
    case Command::pointwise:
      return "pointwise";
    case Command::surface:
      return "surface";
    case Command::verify:
      return "verify";
  }
  return "unknown";
}

std::string to_string(SurfaceMethod method) {
  switch (method) {
    case SurfaceMethod::lbs:
      return "lbs";
    case SurfaceMethod::descent:
      return "descent";
    case SurfaceMethod::both:
      return "both";
  }
  return "unknown";
}

SurfaceMethod parse_method(const std::string& text) {
  if (text == "lbs") return SurfaceMethod::lbs;
  if (text == "descent") return SurfaceMethod::descent;
  if (text == "both") return SurfaceMethod::both;
  throw UsageError("method must be lbs, descent or both");
}

void RunConfig::validate() const {
  switch (command) {
    case Command::hull1d:
      make_density(density);
      if (n < 2) throw UsageError("--n must be at least 2");
      if (iters < 0) throw UsageError("--iters must be non-negative");
      if (probe_j_max < 1) throw UsageError("--probe-j must be positive");
      break;
    case Command::pointwise: {
      const Density w = make_density(density);
      if (matrix.empty()) throw UsageError("--matrix is required");
      w.check_dims(parse_matrix(matrix));
      if (starts < 1) throw UsageError("--starts must be positive");
      break;
    }
    case Command::surface:
      make_builtin_surface(surface);
      if (levels < 0 || levels > 8) throw UsageError("--levels must be in 0..8");
      if (iters < 0) throw UsageError("--iters must be non-negative");
      if (perturb < 0.0) throw UsageError("--perturb must be non-negative");
      break;
    case Command::verify:
      break;
  }
}

}  // namespace invhull::cli
