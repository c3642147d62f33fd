#include "roelab/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

namespace roelab::models {

using ops::cplx;
using Mat = Eigen::MatrixXcd;

double ModelConfig::get(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

namespace {

constexpr cplx I(0.0, 1.0);

Mat pauli(int k) {
  Mat s(2, 2);
  switch (k) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I, I, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct Hop {
  Eigen::VectorXi delta;
  std::function<Mat(const Eigen::VectorXi&)> block;  ///< block(x, x + delta) as a function of x
};

struct Recipe {
  int dim = 2;
  int orbitals = 1;
  Eigen::VectorXi grading;
  std::optional<Eigen::VectorXi> spin;
  std::function<Mat(const Eigen::VectorXi&)> onsite;
  std::vector<Hop> hops;
  sym::SymmetrySpec spec;
};

Eigen::VectorXi vec(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  int k = 0;
  for (int x : v) out[k++] = x;
  return out;
}

Hop constant_hop(Eigen::VectorXi delta, Mat m) {
  return Hop{std::move(delta), [m](const Eigen::VectorXi&) { return m; }};
}

const std::map<std::string, std::map<std::string, double>>& defaults_table() {
  static const std::map<std::string, std::map<std::string, double>> table = {
      {"ssh", {{"t1", 1.0}, {"t2", 0.5}}},
      {"kitaev", {{"t", 1.0}, {"delta", 1.0}, {"mu", 0.5}}},
      {"qwz", {{"m", 1.0}}},
      {"qwz_lr", {{"m", 1.0}, {"eta", 0.1}, {"xi", 1.0}, {"range", 6.0}}},
      {"harper", {{"t", 1.0}, {"p", 1.0}, {"q", 4.0}, {"fermi", std::numeric_limits<double>::quiet_NaN()}}},
      {"haldane", {{"t1", 1.0}, {"t2", 0.1}, {"phi", std::numbers::pi / 2}, {"M", 0.0}}},
      {"kane_mele", {{"t", 1.0}, {"lambda_so", 0.06}, {"lambda_v", 0.1}}},
      {"ti3d", {{"m", -2.0}, {"tz", 1.0}}},
      {"aiii3d", {{"m", 2.0}}},
  };
  return table;
}

const std::vector<std::string> kCommon = {"W", "seed", "decay", "cutoff"};

/// Honeycomb with B shifted onto its cell: orbitals (A, B); nearest neighbours at cell offsets
/// (0,0), (-1,0), (0,-1); next-nearest along b1 = (1,0), b2 = (-1,1), b3 = (0,-1).
void add_haldane_terms(Recipe& r, int offset, double t1, double t2, double phi, double mass) {
  const int m = r.orbitals;
  auto place = [m, offset](const Mat& b2) {
    Mat out = Mat::Zero(m, m);
    out.block(offset, offset, 2, 2) = b2;
    return out;
  };
  Mat ab = Mat::Zero(2, 2);
  ab(0, 1) = t1;
  Mat on = Mat::Zero(2, 2);
  on(0, 1) = t1;
  on(1, 0) = t1;
  on(0, 0) = mass;
  on(1, 1) = -mass;
  auto prev = r.onsite;
  Mat onb = place(on);
  r.onsite = [prev, onb](const Eigen::VectorXi& x) -> Mat { return prev(x) + onb; };
  r.hops.push_back(constant_hop(vec({-1, 0}), place(ab)));
  r.hops.push_back(constant_hop(vec({0, -1}), place(ab)));
  Mat nnn = Mat::Zero(2, 2);
  nnn(0, 0) = t2 * std::exp(I * phi);
  nnn(1, 1) = t2 * std::exp(-I * phi);
  for (const auto& b : {vec({1, 0}), vec({-1, 1}), vec({0, -1})}) r.hops.push_back(constant_hop(b, place(nnn)));
}

double harper_default_fermi(double t, int p, int q) {
  // Lowest gap of the magnetic Bloch bands (q x q, Landau gauge along x).
  const double phi = static_cast<double>(p) / q;
  double band1_max = -1e300, band2_min = 1e300;
  const int nk = 24;
  for (int a = 0; a < nk; ++a)
    for (int b = 0; b < nk; ++b) {
      double kx = 2 * std::numbers::pi * a / nk / q, ky = 2 * std::numbers::pi * b / nk;
      Mat h = Mat::Zero(q, q);
      for (int x = 0; x < q; ++x) {
        h(x, x) += -2 * t * std::cos(ky + 2 * std::numbers::pi * phi * x);
        int y = (x + 1) % q;
        cplx ph = (x + 1 == q) ? std::exp(I * (kx * q)) : cplx(1.0);
        h(x, y) += -t * ph;
        h(y, x) += -t * std::conj(ph);
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
      band1_max = std::max(band1_max, es.eigenvalues()[0]);
      if (q > 1) band2_min = std::min(band2_min, es.eigenvalues()[1]);
    }
  return 0.5 * (band1_max + band2_min);
}

Recipe recipe_for(const ModelConfig& c) {
  Recipe r;
  const std::string& n = c.name;
  auto p = [&](const char* k) { return c.get(k, defaults_table().at(n).at(k)); };
  auto zero_onsite = [](int m) { return [m](const Eigen::VectorXi&) -> Mat { return Mat::Zero(m, m); }; };

  if (n == "ssh") {
    r.dim = 1;
    r.orbitals = 2;
    r.grading = vec({1, -1});
    double t1 = p("t1"), t2 = p("t2");
    Mat on(2, 2);
    on << 0, t1, t1, 0;
    r.onsite = [on](const Eigen::VectorXi&) { return on; };
    Mat hop = Mat::Zero(2, 2);
    hop(1, 0) = t2;
    r.hops.push_back(constant_hop(vec({1}), hop));
    r.spec.has_P = true;
    r.spec.P_unitary = pauli(3);
  } else if (n == "kitaev") {
    r.dim = 1;
    r.orbitals = 2;
    r.grading = vec({1, 1});
    double t = p("t"), d = p("delta"), mu = p("mu");
    Mat on = -mu * pauli(3);
    r.onsite = [on](const Eigen::VectorXi&) { return on; };
    Mat hop(2, 2);
    hop << -t, d, -d, t;
    r.hops.push_back(constant_hop(vec({1}), hop));
    r.spec.has_C = true;
    r.spec.C_sq = 1;
    r.spec.C_unitary = pauli(1);
  } else if (n == "qwz" || n == "qwz_lr") {
    r.dim = 2;
    r.orbitals = 2;
    r.grading = vec({1, 1});
    double m = p("m");
    Mat on = m * pauli(3);
    r.onsite = [on](const Eigen::VectorXi&) { return on; };
    r.hops.push_back(constant_hop(vec({1, 0}), 0.5 * (pauli(3) - I * pauli(1))));
    r.hops.push_back(constant_hop(vec({0, 1}), 0.5 * (pauli(3) - I * pauli(2))));
    if (n == "qwz_lr") {
      double eta = p("eta"), xi = p("xi");
      int range = static_cast<int>(p("range"));
      if (!(xi > 0) || range < 1) throw UsageError("qwz_lr needs xi > 0 and range >= 1");
      // Each unordered pair once: half-plane of offsets.
      for (int dx = 0; dx <= range; ++dx)
        for (int dy = -range; dy <= range; ++dy) {
          if (dx == 0 && dy <= 0) continue;
          double len = std::hypot(dx, dy);
          if (len > range) continue;
          r.hops.push_back(constant_hop(vec({dx, dy}), eta * std::exp(-len / xi) * pauli(3)));
        }
    }
  } else if (n == "harper") {
    r.dim = 2;
    r.orbitals = 1;
    r.grading = vec({1});
    double t = p("t");
    int pp = static_cast<int>(p("p")), q = static_cast<int>(p("q"));
    if (q < 1) throw UsageError("harper needs q >= 1");
    double fermi = c.get("fermi", std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(fermi)) {
      if (q < 2) throw UsageError("harper with integer flux has no gap; pass fermi explicitly");
      fermi = harper_default_fermi(t, pp, q);
    }
    const double phi = static_cast<double>(pp) / q;
    r.onsite = [fermi](const Eigen::VectorXi&) -> Mat { return Mat::Constant(1, 1, -fermi); };
    r.hops.push_back(constant_hop(vec({1, 0}), Mat::Constant(1, 1, -t)));
    r.hops.push_back(Hop{vec({0, 1}), [t, phi](const Eigen::VectorXi& x) -> Mat {
                           return Mat::Constant(1, 1, -t * std::exp(I * (2 * std::numbers::pi * phi * x[0])));
                         }});
  } else if (n == "haldane") {
    r.dim = 2;
    r.orbitals = 2;
    r.grading = vec({1, 1});
    r.onsite = zero_onsite(2);
    add_haldane_terms(r, 0, p("t1"), p("t2"), p("phi"), p("M"));
  } else if (n == "kane_mele") {
    r.dim = 2;
    r.orbitals = 4;
    r.grading = vec({1, 1, 1, 1});
    r.spin = vec({1, 1, -1, -1});
    r.onsite = zero_onsite(4);
    double t = p("t"), so = p("lambda_so"), v = p("lambda_v");
    add_haldane_terms(r, 0, t, so, std::numbers::pi / 2, v);
    add_haldane_terms(r, 2, t, so, -std::numbers::pi / 2, v);
    r.spec.has_T = true;
    r.spec.T_sq = -1;
    Mat tu = Mat::Zero(4, 4);
    tu.block(0, 2, 2, 2) = Mat::Identity(2, 2);
    tu.block(2, 0, 2, 2) = -Mat::Identity(2, 2);
    r.spec.T_unitary = tu;
  } else if (n == "ti3d") {
    r.dim = 3;
    r.orbitals = 4;
    r.grading = vec({1, 1, 1, 1});
    double m = p("m"), tz = p("tz");
    Mat g0 = kron(pauli(3), pauli(0));
    Mat on = m * g0;
    r.onsite = [on](const Eigen::VectorXi&) { return on; };
    for (int a = 0; a < 3; ++a) {
      Mat gi = kron(pauli(1), pauli(a + 1));
      double s = a == 2 ? tz : 1.0;
      Eigen::VectorXi d = Eigen::VectorXi::Unit(3, a);
      r.hops.push_back(constant_hop(d, s * 0.5 * (g0 - I * gi)));
    }
    r.spec.has_T = true;
    r.spec.T_sq = -1;
    r.spec.T_unitary = kron(pauli(0), I * pauli(2));
  } else if (n == "aiii3d") {
    r.dim = 3;
    r.orbitals = 4;
    r.grading = vec({1, 1, -1, -1});
    double m = p("m");
    Mat g4 = kron(pauli(2), pauli(0));
    Mat on = m * g4;
    r.onsite = [on](const Eigen::VectorXi&) { return on; };
    for (int a = 0; a < 3; ++a) {
      Mat gi = kron(pauli(1), pauli(a + 1));
      r.hops.push_back(constant_hop(Eigen::VectorXi::Unit(3, a), 0.5 * (g4 - I * gi)));
    }
    r.spec.has_P = true;
    r.spec.P_unitary = kron(pauli(3), pauli(0));
  } else {
    throw UsageError("unknown model '" + n + "'");
  }
  return r;
}

}  // namespace

std::vector<std::string> model_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : defaults_table()) out.push_back(k);
  return out;
}

int model_dimension(const std::string& name) {
  if (name == "ssh" || name == "kitaev") return 1;
  if (name == "ti3d" || name == "aiii3d") return 3;
  if (defaults_table().count(name)) return 2;
  throw UsageError("unknown model '" + name + "'");
}

std::map<std::string, double> model_defaults(const std::string& name) {
  auto it = defaults_table().find(name);
  if (it == defaults_table().end()) throw UsageError("unknown model '" + name + "'");
  return it->second;
}

std::vector<Eigen::VectorXi> lattice_indices(const geometry::PointSet& ps) {
  std::vector<Eigen::VectorXi> out;
  out.reserve(static_cast<std::size_t>(ps.size()));
  for (int j = 0; j < ps.size(); ++j) {
    Eigen::VectorXi v(ps.dim());
    for (int i = 0; i < ps.dim(); ++i) v[i] = static_cast<int>(std::lround(ps.coord(j)[i]));
    out.push_back(v);
  }
  return out;
}

ops::ControlledOperator symmetric_disorder(const ops::ModulePtr& module, const sym::SymmetrySpec& spec,
                                           double strength, std::uint64_t seed) {
  const int m = module->orbitals;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double bound = std::sqrt(static_cast<double>(m + 2 * m * (m - 1)));
  ops::BlockBuilder b(module);
  for (int x = 0; x < module->sites(); ++x) {
    Mat v(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) v(i, j) = cplx(u(rng), u(rng));
    v = 0.5 * (v + v.adjoint()).eval();
    for (int i = 0; i < m; ++i) v(i, i) = v(i, i).real();
    if (spec.has_T) v = 0.5 * (v + sym::symmetry_image(v, spec, sym::SymmetryKind::T));
    if (spec.has_C) v = 0.5 * (v + sym::symmetry_image(v, spec, sym::SymmetryKind::C));
    if (spec.has_P) v = 0.5 * (v + sym::symmetry_image(v, spec, sym::SymmetryKind::P));
    b.add(x, x, (strength / bound) * v);
  }
  return b.build(true, 0.0);
}

Model build_model(const ModelConfig& config, geometry::PointSetPtr points) {
  if (!points) throw UsageError("model needs a point set");
  auto table = defaults_table().find(config.name);
  if (table == defaults_table().end()) throw UsageError("unknown model '" + config.name + "'");
  for (const auto& [k, v] : config.params) {
    bool known = table->second.count(k) || std::find(kCommon.begin(), kCommon.end(), k) != kCommon.end();
    if (!known) throw UsageError("model '" + config.name + "' has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw UsageError("parameter '" + k + "' must be finite");
  }
  const bool periodic = config.boundary == "periodic", anti = config.boundary == "antiperiodic";
  if (!periodic && !anti && config.boundary != "open")
    throw UsageError("boundary must be open, periodic or antiperiodic");

  Recipe r = recipe_for(config);
  if (points->dim() != r.dim)
    throw UsageError("model '" + config.name + "' needs a " + std::to_string(r.dim) + "d point set");

  auto mod = std::make_shared<ops::SiteModule>(*ops::make_module(points, r.orbitals, r.grading, r.spin));
  mod->periodic = periodic || anti;
  ops::ModulePtr module = mod;

  const auto idx = lattice_indices(*points);
  Eigen::VectorXi lo = Eigen::VectorXi::Constant(r.dim, std::numeric_limits<int>::max());
  Eigen::VectorXi hi = Eigen::VectorXi::Constant(r.dim, std::numeric_limits<int>::min());
  for (const auto& v : idx) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
  Eigen::VectorXi ext = hi - lo + Eigen::VectorXi::Ones(r.dim);
  auto key = [&](const Eigen::VectorXi& v) {
    std::int64_t k = 0;
    for (int i = r.dim - 1; i >= 0; --i) k = k * ext[i] + (v[i] - lo[i]);
    return k;
  };
  std::map<std::int64_t, int> where;
  for (int j = 0; j < points->size(); ++j)
    if (!where.emplace(key(idx[static_cast<std::size_t>(j)]), j).second)
      throw UsageError("two sites round to the same lattice cell; the sample is not a perturbed lattice");
  if (periodic || anti) {
    if (static_cast<std::int64_t>(where.size()) != ext.cast<std::int64_t>().prod())
      throw UsageError("periodic boundary needs a complete rectangular lattice sample");
    if (config.name == "harper") {
      int q = static_cast<int>(config.get("q", 4.0)), pp = static_cast<int>(config.get("p", 1.0));
      if ((static_cast<std::int64_t>(ext[0]) * pp) % q != 0)
        throw UsageError("periodic Harper sample needs p * Lx divisible by q");
    }
  }

  const double decay = config.get("decay", std::numeric_limits<double>::infinity());
  const double cutoff = config.get("cutoff", std::numeric_limits<double>::infinity());
  if (!(decay > 0) || !(cutoff > 0)) throw UsageError("decay and cutoff must be positive");

  ops::BlockBuilder b(module);
  double declared = 0;
  for (int x = 0; x < points->size(); ++x) {
    const Eigen::VectorXi& ix = idx[static_cast<std::size_t>(x)];
    Mat on = r.onsite(ix);
    b.add(x, x, 0.5 * (on + on.adjoint()));
    for (const auto& hop : r.hops) {
      Eigen::VectorXi iy = ix + hop.delta;
      double sign = 1.0;
      if (periodic || anti) {
        for (int i = 0; i < r.dim; ++i) {
          int off = iy[i] - lo[i];
          int wrapped = ((off % ext[i]) + ext[i]) % ext[i];
          if (wrapped != off && anti) sign = -sign;
          iy[i] = lo[i] + wrapped;
        }
      }
      bool inside = true;
      for (int i = 0; i < r.dim; ++i) inside = inside && iy[i] >= lo[i] && iy[i] <= hi[i];
      if (!inside) continue;
      auto it = where.find(key(iy));
      if (it == where.end()) continue;
      int y = it->second;
      if (y == x) throw UsageError("sample too small for periodic wrapping of this model");
      double f = 1.0;
      if (!(periodic || anti)) {
        double dist = points->distance(x, y), ideal = hop.delta.cast<double>().norm();
        if (dist > cutoff) continue;
        if (std::isfinite(decay)) f = std::exp(-(dist - ideal) / decay);
      }
      b.add_hermitian(x, y, sign * f * hop.block(ix));
      declared = std::max(declared, points->distance(x, y));
    }
  }
  ops::ControlledOperator H = b.build(true, declared);

  const double W = config.get("W", 0.0);
  if (W < 0) throw UsageError("disorder strength W must be nonnegative");
  if (W > 0) {
    auto seed = static_cast<std::uint64_t>(config.get("seed", 0.0));
    H = H + symmetric_disorder(module, r.spec, W, seed);
  }
  r.spec.validate();
  return Model{config, points, module, H, r.spec};
}

}  // namespace roelab::models
