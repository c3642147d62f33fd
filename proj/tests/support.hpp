#pragma once

#include "roelab/bulkedge.hpp"
#include "roelab/io.hpp"

#include <map>
#include <numbers>
#include <random>
#include <string>

namespace test {

using namespace roelab;
using cplx = std::complex<double>;

inline geometry::PointSetPtr lattice(int d, std::vector<int> extent) {
  return std::make_shared<const geometry::PointSet>(geometry::generate(geometry::LatticeSpec{d, std::move(extent), 1.0}));
}

inline geometry::PointSetPtr square(int n) { return lattice(2, {n, n}); }

inline models::Model model(const std::string& name, geometry::PointSetPtr ps, std::map<std::string, double> params = {},
                           std::string boundary = "open") {
  return models::build_model(models::ModelConfig{name, std::move(params), std::move(boundary)}, std::move(ps));
}

/// Half-space cut along axis 0 through the middle of the sample.
inline geometry::Partition middle_cut(const geometry::PointSet& ps, std::optional<double> thickness = std::nullopt) {
  Eigen::VectorXd n = Eigen::VectorXd::Unit(ps.dim(), 0);
  return geometry::partition_halfspace(ps, n, ps.bounding_box().center()[0], thickness);
}

/// Random operator with blocks on every pair of sites closer than `radius`.
inline ops::ControlledOperator random_operator(const ops::ModulePtr& module, double radius, std::mt19937_64& rng,
                                               bool hermitian, double density = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), coin(0.0, 1.0);
  const auto& ps = *module->points;
  const int m = module->orbitals;
  ops::BlockBuilder b(module);
  for (int x = 0; x < ps.size(); ++x)
    for (int y = hermitian ? x : 0; y < ps.size(); ++y) {
      if (ps.distance(x, y) > radius || coin(rng) > density) continue;
      Eigen::MatrixXcd blk(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) blk(i, j) = cplx(u(rng), u(rng));
      if (hermitian) b.add_hermitian(x, y, x == y ? Eigen::MatrixXcd(0.5 * (blk + blk.adjoint())) : blk);
      else b.add(x, y, blk);
    }
  return b.build(hermitian);
}

/// Smallest |eigenvalue| of a Hermitian operator, by Eigen's own solver.
inline double spectral_gap(const ops::ControlledOperator& h, double fermi = 0.0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.dense(), Eigen::EigenvaluesOnly);
  return (es.eigenvalues().array() - fermi).abs().minCoeff();
}

/// Random hopping operator with two domains: rightward hops of modulus about a left of the sample
/// centre and about b right of it, random phases, symmetric vertical hops. Windowed traces of
/// [A, A^*] then carry a boundary term (b^2 - a^2) / (2n) that does not average out.
inline ops::ControlledOperator two_domain_hopping(const ops::ModulePtr& module, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), amp(0.5, 1.0), jump(0.3, 0.6), phase(0.0, 2 * std::numbers::pi);
  const auto& ps = *module->points;
  const double split = ps.bounding_box().center()[0];
  double a = amp(rng), b = a + jump(rng);
  if (u(rng) < 0) std::swap(a, b);
  auto index = models::lattice_indices(ps);
  std::map<std::pair<int, int>, int> site;
  for (int x = 0; x < ps.size(); ++x) site[{index[static_cast<std::size_t>(x)][0], index[static_cast<std::size_t>(x)][1]}] = x;
  ops::BlockBuilder bld(module);
  auto one = [](cplx v) { return Eigen::MatrixXcd::Constant(1, 1, v); };
  for (int x = 0; x < ps.size(); ++x) {
    int i = index[static_cast<std::size_t>(x)][0], j = index[static_cast<std::size_t>(x)][1];
    bld.add(x, x, one(u(rng)));
    if (auto it = site.find({i + 1, j}); it != site.end()) {
      double h = (ps.coord(x)[0] < split ? a : b) * (1 + 0.05 * u(rng));
      bld.add(x, it->second, one(std::polar(h, phase(rng))));
    }
    if (auto it = site.find({i, j + 1}); it != site.end()) {
      cplx v = std::polar(0.3 * (1 + u(rng)), phase(rng));
      bld.add(x, it->second, one(v));
      bld.add(it->second, x, one(v));
    }
  }
  return bld.build(false);
}

inline std::string data_path(const std::string& name) { return std::string(ROELAB_TEST_DATA) + "/" + name; }

}  // namespace test
