#pragma once

#include "invhull_cli/config.hpp"
#include "invhull_cli/report.hpp"

#include <string>
#include <vector>

namespace invhull::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitPropertyFailure = 4;

// Curve, density, hull value, c, status, oracle value, probe and
// Euler-Lagrange spread.
Report run_hull1d(const RunConfig& cfg);
Report run_pointwise(const RunConfig& cfg);
// Beltrami solve and/or inner-variation descent on a built-in surface.
Report run_surface(const RunConfig& cfg);
// The property suite. report.failed is set when any property fails.
Report run_verify(const RunConfig& cfg);

Report run(const RunConfig& cfg);

// Single-polyline SVG of a history with axes. Throws UsageError on an empty
// history and IoError on an unwritable path.
void emit_svg(const std::vector<double>& history, const std::string& path);
std::string render_svg(const std::vector<double>& history);

std::string version();

}  // namespace invhull::cli
