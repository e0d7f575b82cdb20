#include "invhull/curve.hpp"

#include "invhull/density.hpp"
#include "invhull/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace invhull {

namespace {

MatrixF as_column(const Point& p) {
  if (p.size() < 1 || p.size() > kMaxRows) {
    throw UsageError("curve dimension must be in 1..8");
  }
  return MatrixF(p);
}

}  // namespace

SampledCurve SampledCurve::from_functions(std::string name, PathFn u, PathFn du,
                                          int n) {
  if (n < 1) throw UsageError("curve needs at least one cell");
  SampledCurve c;
  c.name_ = std::move(name);
  c.u_.reserve(n + 1);
  for (int k = 0; k <= n; ++k) c.u_.push_back(u(static_cast<double>(k) / n));
  c.dim_ = static_cast<int>(c.u_.front().size());
  c.du_.reserve(n);
  for (int k = 0; k < n; ++k) c.du_.push_back(as_column(du((k + 0.5) / n)));
  c.u_fn_ = std::move(u);
  c.du_fn_ = std::move(du);
  c.finalize();
  return c;
}

SampledCurve SampledCurve::from_samples(std::string name, std::vector<double> t,
                                        std::vector<Point> u) {
  if (t.size() < 2 || t.size() != u.size()) {
    throw UsageError("curve samples: need >= 2 rows with matching t");
  }
  const int n = static_cast<int>(t.size()) - 1;
  const double h = 1.0 / n;
  for (int k = 0; k <= n; ++k) {
    if (std::abs(t[k] - k * h) > 1e-9) {
      throw UsageError("curve samples: grid must be uniform on [0, 1]");
    }
  }
  SampledCurve c;
  c.name_ = std::move(name);
  c.dim_ = static_cast<int>(u.front().size());
  for (const auto& p : u) {
    if (p.size() != c.dim_) throw UsageError("curve samples: ragged rows");
    if (!p.allFinite()) throw UsageError("curve samples: non-finite value");
  }
  c.u_ = std::move(u);
  for (int k = 0; k < n; ++k) c.du_.push_back(as_column((c.u_[k + 1] - c.u_[k]) / h));
  c.finalize();
  return c;
}

void SampledCurve::finalize() {
  scale_ = 0.0;
  for (const auto& d : du_) scale_ = std::max(scale_, d.norm());
  degenerate_ = scale_ == 0.0;
  for (const auto& d : du_) {
    if (d.norm() < kRegularityEpsilon * scale_) degenerate_ = true;
  }
}

void SampledCurve::require_regular() const {
  if (degenerate_) {
    throw RegularityError("curve '" + name_ +
                          "' is degenerate: |u'| below eps_reg * scale");
  }
}

MatrixF SampledCurve::derivative_at(double s) const {
  if (du_fn_) return as_column(du_fn_(s));
  const int n = cells();
  const double pos = s * n - 0.5;
  if (pos <= 0.0) return du_.front();
  if (pos >= n - 1) return du_.back();
  const int k = static_cast<int>(pos);
  const double w = pos - k;
  return (1.0 - w) * du_[k] + w * du_[k + 1];
}

Point SampledCurve::value_at(double s) const {
  if (u_fn_) return u_fn_(s);
  const int n = cells();
  const double pos = std::clamp(s, 0.0, 1.0) * n;
  const int k = std::min(static_cast<int>(pos), n - 1);
  const double w = pos - k;
  return (1.0 - w) * u_[k] + w * u_[k + 1];
}

SampledCurve SampledCurve::composed(const std::function<double(double)>& psi,
                                    const std::function<double(double)>& dpsi,
                                    int n) const {
  if (!u_fn_ || !du_fn_) {
    throw UsageError("composition needs an analytic curve");
  }
  PathFn u = u_fn_;
  PathFn du = du_fn_;
  return from_functions(
      name_ + "*reparam", [u, psi](double t) { return u(psi(t)); },
      [du, psi, dpsi](double t) -> Point { return du(psi(t)) * dpsi(t); }, n);
}

SampledCurve make_builtin_curve(const std::string& spec, int n) {
  using std::numbers::pi;
  if (spec.rfind("line:", 0) == 0) {
    std::vector<double> dir;
    std::stringstream ss(spec.substr(5));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        dir.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw UsageError("malformed curve '" + spec + "'");
      }
    }
    if (dir.empty() || dir.size() > static_cast<std::size_t>(kMaxRows)) {
      throw UsageError("malformed curve '" + spec + "'");
    }
    Point d = Eigen::Map<Point>(dir.data(), static_cast<Eigen::Index>(dir.size()));
    return SampledCurve::from_functions(
        spec, [d](double t) -> Point { return t * d; },
        [d](double) -> Point { return d; }, n);
  }
  if (spec == "parabola") {
    return SampledCurve::from_functions(
        spec, [](double t) { return Point(Eigen::Vector3d(t * t, t, 0.0)); },
        [](double t) { return Point(Eigen::Vector3d(2.0 * t, 1.0, 0.0)); }, n);
  }
  if (spec == "helix") {
    return SampledCurve::from_functions(
        spec,
        [](double t) {
          return Point(Eigen::Vector3d(std::cos(2 * pi * t), std::sin(2 * pi * t), t));
        },
        [](double t) {
          return Point(Eigen::Vector3d(-2 * pi * std::sin(2 * pi * t),
                                       2 * pi * std::cos(2 * pi * t), 1.0));
        },
        n);
  }
  throw UsageError("unknown curve '" + spec + "'");
}

SampledCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open curve file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw UsageError("empty curve file '" + path + "'");
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") {
    throw UsageError("curve CSV header must be t,x1,...,xm");
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "x" + std::to_string(i)) {
      throw UsageError("curve CSV header must be t,x1,...,xm");
    }
  }
  const int m = static_cast<int>(header.size()) - 1;
  std::vector<double> t;
  std::vector<Point> u;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream rs(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(rs, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw UsageError("malformed curve CSV row: " + line);
      }
    }
    if (static_cast<int>(row.size()) != m + 1) {
      throw UsageError("curve CSV row has wrong arity: " + line);
    }
    t.push_back(row[0]);
    u.push_back(Eigen::Map<Point>(row.data() + 1, m));
  }
  return SampledCurve::from_samples(path, std::move(t), std::move(u));
}

void write_curve_csv(const SampledCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write curve file '" + path + "'");
  out << "t";
  for (int i = 1; i <= curve.dim(); ++i) out << ",x" << i;
  out << "\n";
  out.precision(17);
  for (int k = 0; k <= curve.cells(); ++k) {
    out << curve.t(k);
    for (int i = 0; i < curve.dim(); ++i) out << "," << curve.values()[k](i);
    out << "\n";
  }
}

SampledCurve random_smooth_curve(std::uint64_t seed, int n, int m) {
  using std::numbers::pi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Point drift(m);
  for (int i = 0; i < m; ++i) drift(i) = unit(rng);
  if (drift.norm() < 0.2) drift(0) += 1.0;
  constexpr int kModes = 3;
  std::vector<Point> a(kModes, Point(m)), b(kModes, Point(m));
  double budget = 0.0;
  for (int k = 0; k < kModes; ++k) {
    for (int i = 0; i < m; ++i) {
      a[k](i) = unit(rng);
      b[k](i) = unit(rng);
    }
    budget += a[k].norm() + b[k].norm();
  }
  // modes contribute at most 0.75 |drift| to the speed
  const double shrink = 0.75 * drift.norm() / budget;
  for (int k = 0; k < kModes; ++k) {
    a[k] *= shrink;
    b[k] *= shrink;
  }
  auto u = [=](double t) -> Point {
    Point p = drift * t;
    for (int k = 0; k < kModes; ++k) {
      const double w = 2 * pi * (k + 1);
      p += a[k] * (std::sin(w * t) / w) + b[k] * ((1.0 - std::cos(w * t)) / w);
    }
    return p;
  };
  auto du = [=](double t) -> Point {
    Point v = drift;
    for (int k = 0; k < kModes; ++k) {
      const double w = 2 * pi * (k + 1);
      v += a[k] * std::cos(w * t) + b[k] * std::sin(w * t);
    }
    return v;
  };
  return SampledCurve::from_functions("random:" + std::to_string(seed), u, du, n);
}

}  // namespace invhull
