#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace invhull {

// Every error raised by the library derives from Error so callers can map
// them onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: unknown density id, shape mismatch, bad literal.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Unreadable or unwritable file.
class IoError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (e.g. r <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Degenerate (non-regular) curve, surface or matrix.
class RegularityError : public Error {
 public:
  using Error::Error;
};

// A section r -> r W(x/r) that is not strictly convex where convexity is required.
class ConvexityError : public Error {
 public:
  using Error::Error;
};

class NoRootError : public Error {
 public:
  using Error::Error;
};

class InfeasibleNormalizationError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

// A discrete map with a non-positive Jacobian on some triangle.
class FoldError : public Error {
 public:
  FoldError(const std::string& what, int triangle)
      : Error(what), triangle_(triangle) {}
  int triangle() const { return triangle_; }

 private:
  int triangle_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> residual_history)
      : Error(what), history_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace invhull
