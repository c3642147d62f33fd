#include "roelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace roelab::geometry {

namespace {

Eigen::MatrixXd grid_points(const std::vector<int>& extent, double spacing, double shift) {
  const int d = static_cast<int>(extent.size());
  std::int64_t n = 1;
  for (int e : extent) n *= e;
  Eigen::MatrixXd c(d, n);
  for (std::int64_t id = 0; id < n; ++id) {
    std::int64_t r = id;
    for (int i = 0; i < d; ++i) {
      c(i, id) = shift + spacing * static_cast<double>(r % extent[i]);
      r /= extent[i];
    }
  }
  return c;
}

void check_extent(int dim, const std::vector<int>& extent) {
  if (dim < 1 || dim > 3) throw UsageError("lattice dimension must be 1, 2 or 3");
  if (static_cast<int>(extent.size()) != dim) throw UsageError("lattice extent must list one size per axis");
  for (int e : extent)
    if (e < 1) throw UsageError("lattice extent must be positive");
}

PointSet make(const LatticeSpec& s) {
  check_extent(s.dim, s.extent);
  if (!(s.spacing > 0)) throw UsageError("lattice spacing must be positive");
  Box w{Eigen::VectorXd::Zero(s.dim), Eigen::VectorXd(s.dim)};
  for (int i = 0; i < s.dim; ++i) w.hi[i] = s.spacing * s.extent[i];
  return PointSet(s.dim, grid_points(s.extent, s.spacing, 0.0), w);
}

PointSet make(const HoneycombShiftSpec& s) {
  return make(LatticeSpec{2, {s.nx, s.ny}, 1.0});
}

PointSet make(const PerturbedLatticeSpec& s) {
  check_extent(s.dim, s.extent);
  if (s.jitter < 0) throw UsageError("jitter must be nonnegative");
  if (s.jitter >= 0.5)
    throw UsageError("jitter must stay below half the lattice spacing to keep the set uniformly discrete");
  Eigen::MatrixXd c = grid_points(s.extent, 1.0, 0.0);
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> u(-s.jitter, s.jitter);
  for (Eigen::Index j = 0; j < c.cols(); ++j)
    for (int i = 0; i < s.dim; ++i) c(i, j) += u(rng);
  Box w{Eigen::VectorXd::Constant(s.dim, -0.5), Eigen::VectorXd(s.dim)};
  for (int i = 0; i < s.dim; ++i) w.hi[i] = s.extent[i] - 0.5;
  return PointSet(s.dim, std::move(c), w);
}

PointSet make(const FibonacciSpec& s) {
  if (!(s.length > 0)) throw UsageError("Fibonacci window length must be positive");
  const double tau = std::numbers::phi;
  // Lift (m, n) -> physical m*tau + n, internal n - m/tau; acceptance [-1/tau, 1).
  std::vector<double> xs;
  int mmax = static_cast<int>(std::ceil(s.length / (tau + 1 / tau))) + 2;
  for (int m = -2; m <= mmax; ++m) {
    int nlo = static_cast<int>(std::ceil(m / tau - 1 / tau));
    for (int n = nlo; n - m / tau < 1.0; ++n) {
      double x = m * tau + n;
      if (n - m / tau >= -1 / tau && x >= 0 && x < s.length) xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  Eigen::MatrixXd c(1, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) c(0, static_cast<Eigen::Index>(k)) = xs[k];
  return PointSet(1, std::move(c), Box{Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, s.length)});
}

PointSet make(const AmmannBeenkerSpec& s) {
  if (!(s.size > 0)) throw UsageError("Ammann-Beenker window size must be positive");
  Eigen::Matrix<double, 2, 4> par, perp;
  for (int k = 0; k < 4; ++k) {
    double a = k * std::numbers::pi / 4, b = 3 * k * std::numbers::pi / 4;
    par.col(k) << std::cos(a), std::sin(a);
    perp.col(k) << std::cos(b), std::sin(b);
  }
  // The acceptance window is the projected unit hypercube: a regular octagon. A generic
  // offset keeps lattice points off its boundary.
  Eigen::Vector2d center = 0.5 * perp.rowwise().sum() + Eigen::Vector2d(1.234e-3, 2.71e-4);
  Eigen::Vector4d halfwidth;
  Eigen::Matrix<double, 2, 4> normals;
  for (int j = 0; j < 4; ++j) {
    normals.col(j) << -perp(1, j), perp(0, j);
    halfwidth[j] = 0.5 * (normals.col(j).transpose() * perp).cwiseAbs().sum();
  }
  auto accept = [&](const Eigen::Vector2d& y) {
    for (int j = 0; j < 4; ++j)
      if (std::abs(normals.col(j).dot(y - center)) >= halfwidth[j]) return false;
    return true;
  };
  // n_k = (par_k . x + perp_k . y) / 2 bounds the search box.
  double bound = 0.5 * (s.size * std::sqrt(2.0) + 3.0) + 1;
  int B = static_cast<int>(std::ceil(bound));
  std::vector<Eigen::Vector2d> pts;
  Eigen::Vector4d n;
  for (int a = -B; a <= B; ++a)
    for (int b = -B; b <= B; ++b)
      for (int c = -B; c <= B; ++c)
        for (int e = -B; e <= B; ++e) {
          n << a, b, c, e;
          Eigen::Vector2d x = par * n;
          if (x[0] < 0 || x[1] < 0 || x[0] >= s.size || x[1] >= s.size) continue;
          if (accept(perp * n)) pts.push_back(x);
        }
  std::sort(pts.begin(), pts.end(), [](const auto& p, const auto& q) {
    return p[1] < q[1] || (p[1] == q[1] && p[0] < q[0]);
  });
  Eigen::MatrixXd c(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) c.col(static_cast<Eigen::Index>(k)) = pts[k];
  return PointSet(2, std::move(c), Box{Eigen::Vector2d::Zero(), Eigen::Vector2d::Constant(s.size)});
}

PointSet make(const ExplicitSpec& s) {
  if (s.points.empty()) throw UsageError("explicit point list is empty");
  Eigen::MatrixXd c(s.dim, static_cast<Eigen::Index>(s.points.size()));
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    if (s.points[k].size() != s.dim) throw UsageError("explicit point has the wrong dimension");
    c.col(static_cast<Eigen::Index>(k)) = s.points[k];
  }
  Box w;
  if (s.window) {
    w = *s.window;
  } else {
    w.lo = c.rowwise().minCoeff().array() - 0.5;
    w.hi = c.rowwise().maxCoeff().array() + 0.5;
  }
  return PointSet(s.dim, std::move(c), w);
}

}  // namespace

PointSet generate(const GeneratorSpec& spec) {
  return std::visit([](const auto& s) { return make(s); }, spec);
}

}  // namespace roelab::geometry
