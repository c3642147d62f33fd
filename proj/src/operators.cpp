#include "roelab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>

namespace roelab::ops {

ModulePtr make_module(geometry::PointSetPtr points, int orbitals, std::optional<Eigen::VectorXi> grading,
                      std::optional<Eigen::VectorXi> spin) {
  if (!points) throw UsageError("module needs a point set");
  if (orbitals < 1) throw UsageError("module needs at least one orbital per site");
  auto m = std::make_shared<SiteModule>();
  m->points = std::move(points);
  m->orbitals = orbitals;
  m->grading = grading ? *grading : Eigen::VectorXi::Ones(orbitals);
  if (m->grading.size() != orbitals) throw UsageError("grading must list one sign per orbital");
  for (int i = 0; i < orbitals; ++i)
    if (std::abs(m->grading[i]) != 1) throw UsageError("grading entries must be +1 or -1");
  if (spin) {
    if (spin->size() != orbitals) throw UsageError("spin labels must list one value per orbital");
    m->spin = *spin;
  }
  return m;
}

ModulePtr restrict_module(const ModulePtr& module, const std::vector<int>& site_ids) {
  auto sub = std::make_shared<SiteModule>(*module);
  sub->points = std::make_shared<const geometry::PointSet>(module->points->subset(site_ids));
  sub->parent_ids = site_ids;
  return sub;
}

namespace {

double site_distance(const SiteModule& m, int i, int j) {
  return m.points->distance(m.site_of(i), m.site_of(j));
}

bool same_space(const ControlledOperator& a, const ControlledOperator& b) {
  if (a.module_ptr() == b.module_ptr()) return true;
  return a.module().points == b.module().points && a.module().orbitals == b.module().orbitals;
}

SparseMatrix pruned(SparseMatrix m) {
  m.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return std::abs(v) > kZero; });
  m.makeCompressed();
  return m;
}

}  // namespace

double max_entry(const SparseMatrix& a) {
  double m = 0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

ControlledOperator::ControlledOperator(ModulePtr module, SparseMatrix matrix, double declared_propagation,
                                       bool hermitian)
    : module_(std::move(module)), matrix_(std::move(matrix)), declared_(declared_propagation),
      hermitian_(hermitian) {
  if (!module_) throw UsageError("operator needs a module");
  const int n = module_->dimension();
  if (matrix_.rows() != n || matrix_.cols() != n)
    throw UsageError("operator dimension does not match its module");
  if (declared_ < 0) throw UsageError("declared propagation must be nonnegative");
  matrix_.makeCompressed();
  for (int k = 0; k < matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) {
      if (std::abs(it.value()) <= kZero) continue;
      double d = site_distance(*module_, static_cast<int>(it.row()), static_cast<int>(it.col()));
      if (d > declared_ + 1e-9)
        throw UsageError("operator entry at distance " + std::to_string(d) +
                         " exceeds the declared propagation " + std::to_string(declared_));
    }
  if (hermitian_) {
    SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
    if (max_entry(diff) > 1e-12 * std::max(1.0, max_entry(matrix_)))
      throw UsageError("operator flagged Hermitian is not self-adjoint");
  }
}

ControlledOperator ControlledOperator::from_dense(ModulePtr module, const Eigen::MatrixXcd& m,
                                                  std::optional<double> declared_propagation, bool hermitian) {
  if (!module) throw UsageError("operator needs a module");
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Triplet<cplx>> t;
  double prop = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > kZero) {
        t.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
        if (!declared_propagation)
          prop = std::max(prop, site_distance(*module, static_cast<int>(i), static_cast<int>(j)));
      }
  SparseMatrix s(n, m.cols());
  s.setFromTriplets(t.begin(), t.end());
  return ControlledOperator(std::move(module), std::move(s), declared_propagation.value_or(prop), hermitian);
}

ControlledOperator ControlledOperator::identity(ModulePtr module) {
  SparseMatrix s(module->dimension(), module->dimension());
  s.setIdentity();
  return ControlledOperator(std::move(module), std::move(s), 0.0, true);
}

ControlledOperator ControlledOperator::grading(ModulePtr module) {
  const int n = module->dimension();
  SparseMatrix s(n, n);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, cplx(module->grading[i % module->orbitals]));
  s.setFromTriplets(t.begin(), t.end());
  return ControlledOperator(std::move(module), std::move(s), 0.0, true);
}

ControlledOperator ControlledOperator::zero(ModulePtr module) {
  SparseMatrix s(module->dimension(), module->dimension());
  return ControlledOperator(std::move(module), std::move(s), 0.0, true);
}

Eigen::MatrixXcd ControlledOperator::block(int x, int y) const {
  const int m = module_->orbitals;
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (SparseMatrix::InnerIterator it(matrix_, x * m + a); it; ++it) {
      int c = static_cast<int>(it.col());
      if (c / m == y) b(a, c % m) = it.value();
    }
  return b;
}

ControlledOperator ControlledOperator::adjoint() const {
  return ControlledOperator(module_, SparseMatrix(matrix_.adjoint()), declared_, hermitian_);
}

ControlledOperator ControlledOperator::scaled(cplx factor) const {
  bool herm = hermitian_ && std::abs(factor.imag()) == 0.0;
  return ControlledOperator(module_, SparseMatrix(matrix_ * factor), declared_, herm);
}

ControlledOperator ControlledOperator::with_propagation(double bound) const {
  return ControlledOperator(module_, matrix_, bound, hermitian_);
}

ControlledOperator operator+(const ControlledOperator& a, const ControlledOperator& b) {
  if (!same_space(a, b)) throw UsageError("operators live on different modules");
  return ControlledOperator(a.module_ptr(), pruned(a.matrix() + b.matrix()),
                            std::max(a.declared_propagation(), b.declared_propagation()),
                            a.hermitian() && b.hermitian());
}

ControlledOperator operator-(const ControlledOperator& a, const ControlledOperator& b) {
  return a + b.scaled(-1.0);
}

ControlledOperator operator*(const ControlledOperator& a, const ControlledOperator& b) {
  if (!same_space(a, b)) throw UsageError("operators live on different modules");
  SparseMatrix p = a.matrix() * b.matrix();
  return ControlledOperator(a.module_ptr(), pruned(std::move(p)),
                            a.declared_propagation() + b.declared_propagation(), false);
}

// ---------------------------------------------------------------------------

BlockBuilder::BlockBuilder(ModulePtr module) : module_(std::move(module)) {}

void BlockBuilder::add(int x, int y, const Eigen::MatrixXcd& block) {
  const int m = module_->orbitals;
  if (block.rows() != m || block.cols() != m) throw UsageError("block has the wrong orbital dimension");
  if (x < 0 || y < 0 || x >= module_->sites() || y >= module_->sites()) throw UsageError("block site out of range");
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (std::abs(block(a, b)) > 0) entries_.emplace_back(x * m + a, y * m + b, block(a, b));
}

void BlockBuilder::add_hermitian(int x, int y, const Eigen::MatrixXcd& block) {
  add(x, y, block);
  add(y, x, block.adjoint());
}

ControlledOperator BlockBuilder::build(bool hermitian, std::optional<double> declared_propagation) const {
  const int n = module_->dimension();
  SparseMatrix s(n, n);
  s.setFromTriplets(entries_.begin(), entries_.end());
  s = pruned(std::move(s));
  double prop = declared_propagation.value_or(0.0);
  if (!declared_propagation)
    for (int k = 0; k < s.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(s, k); it; ++it)
        prop = std::max(prop, site_distance(*module_, static_cast<int>(it.row()), static_cast<int>(it.col())));
  return ControlledOperator(module_, std::move(s), prop, hermitian);
}

// ---------------------------------------------------------------------------

double propagation(const ControlledOperator& a) {
  double p = 0;
  const auto& m = a.matrix();
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (std::abs(it.value()) > kZero)
        p = std::max(p, site_distance(a.module(), static_cast<int>(it.row()), static_cast<int>(it.col())));
  return p;
}

ControlledOperator truncate(const ControlledOperator& h, double radius) {
  if (!(radius > 0)) throw UsageError("truncation radius must be positive");
  SparseMatrix m = h.matrix();
  const SiteModule& mod = h.module();
  m.prune([&](Eigen::Index i, Eigen::Index j, const cplx&) {
    return site_distance(mod, static_cast<int>(i), static_cast<int>(j)) < radius;
  });
  return ControlledOperator(h.module_ptr(), std::move(m), std::min(h.declared_propagation(), radius),
                            h.hermitian());
}

ControlledOperator derivation(const ControlledOperator& a, const Eigen::VectorXd& direction) {
  const auto& ps = *a.module().points;
  if (direction.size() != ps.dim()) throw UsageError("derivation direction has the wrong dimension");
  SparseMatrix m = a.matrix();
  const int orb = a.module().orbitals;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      int x = static_cast<int>(it.row()) / orb, y = static_cast<int>(it.col()) / orb;
      it.valueRef() *= cplx(0.0, direction.dot(ps.coord(x) - ps.coord(y)));
    }
  return ControlledOperator(a.module_ptr(), pruned(std::move(m)), a.declared_propagation(), false);
}

ControlledOperator derivation(const ControlledOperator& a, int axis) {
  const int d = a.module().points->dim();
  if (axis < 0 || axis >= d) throw UsageError("derivation axis out of range");
  return derivation(a, Eigen::VectorXd::Unit(d, axis));
}

ControlledOperator compress(const ControlledOperator& h, const std::vector<int>& site_ids) {
  std::vector<char> keep(static_cast<std::size_t>(h.module().sites()), 0);
  for (int s : site_ids) keep.at(static_cast<std::size_t>(s)) = 1;
  SparseMatrix m = h.matrix();
  const int orb = h.module().orbitals;
  m.prune([&](Eigen::Index i, Eigen::Index j, const cplx&) {
    return keep[static_cast<std::size_t>(i / orb)] && keep[static_cast<std::size_t>(j / orb)];
  });
  return ControlledOperator(h.module_ptr(), std::move(m), h.declared_propagation(), h.hermitian());
}

ControlledOperator restrict_to(const ControlledOperator& h, const ModulePtr& sub) {
  const int orb = h.module().orbitals;
  if (sub->orbitals != orb) throw UsageError("restricted module has a different orbital count");
  std::vector<int> child(static_cast<std::size_t>(h.module().sites()), -1);
  for (std::size_t k = 0; k < sub->parent_ids.size(); ++k) child.at(static_cast<std::size_t>(sub->parent_ids[k])) = static_cast<int>(k);
  std::vector<Eigen::Triplet<cplx>> t;
  const auto& m = h.matrix();
  for (int r = 0; r < m.outerSize(); ++r) {
    int cr = child[static_cast<std::size_t>(r / orb)];
    if (cr < 0) continue;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      int cc = child[static_cast<std::size_t>(it.col() / orb)];
      if (cc >= 0) t.emplace_back(cr * orb + r % orb, cc * orb + static_cast<int>(it.col() % orb), it.value());
    }
  }
  SparseMatrix s(sub->dimension(), sub->dimension());
  s.setFromTriplets(t.begin(), t.end());
  return ControlledOperator(sub, std::move(s), h.declared_propagation(), h.hermitian());
}

ControlledOperator restrict_to(const ControlledOperator& h, const std::vector<int>& site_ids) {
  return restrict_to(h, restrict_module(h.module_ptr(), site_ids));
}

double operator_norm(const ControlledOperator& a) { return spectral::operator_norm(a.dense()); }

std::size_t fingerprint(const ControlledOperator& a) {
  std::size_t h = std::hash<const void*>{}(a.module_ptr().get());
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  const auto& m = a.matrix();
  mix(static_cast<std::size_t>(m.nonZeros()));
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      mix(static_cast<std::size_t>(it.col()));
      mix(std::hash<double>{}(it.value().real()));
      mix(std::hash<double>{}(it.value().imag()));
    }
  return h;
}

// ---------------------------------------------------------------------------

GapCertificate certify_gap(const ControlledOperator& h, const GapOptions& options) {
  if (!h.hermitian()) throw UsageError("gap certification needs a Hermitian operator");
  auto es = std::make_shared<spectral::Eigensystem>(spectral::eigh(h.dense()));
  const SiteModule& mod = h.module();
  const int n = mod.dimension();

  std::vector<char> boundary(static_cast<std::size_t>(n), 0);
  bool use_margin = options.boundary_margin && !mod.periodic;
  if (use_margin) {
    double width = options.margin_width.value_or(2 * std::max(h.declared_propagation(), 1e-12));
    geometry::Box bb = mod.points->bounding_box();
    const auto& ps = *mod.points;
    std::vector<double> depth(static_cast<std::size_t>(ps.size()), std::numeric_limits<double>::infinity());
    for (int x = 0; x < ps.size(); ++x) {
      Eigen::VectorXd p = ps.coord(x);
      for (int a = 0; a < p.size(); ++a) {
        if (bb.hi[a] - bb.lo[a] < 1e-12) continue;  // flat axis carries no boundary
        depth[static_cast<std::size_t>(x)] = std::min({depth[static_cast<std::size_t>(x)], p[a] - bb.lo[a], bb.hi[a] - p[a]});
      }
    }
    if (!options.margin_width) {
      // at most a third of the sites in the layer
      std::vector<double> sorted = depth;
      std::sort(sorted.begin(), sorted.end());
      width = std::min(width, sorted[sorted.size() / 3]);
    }
    int count = 0;
    for (int i = 0; i < n; ++i) {
      boundary[static_cast<std::size_t>(i)] = depth[static_cast<std::size_t>(mod.site_of(i))] < width;
      count += boundary[static_cast<std::size_t>(i)];
    }
    if (count == n || count == 0) use_margin = false;
  }

  GapCertificate cert;
  cert.fermi = options.fermi;
  cert.lower_spectrum_max = -std::numeric_limits<double>::infinity();
  cert.upper_spectrum_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (use_margin) {
      double w = 0;
      for (int i = 0; i < n; ++i)
        if (boundary[static_cast<std::size_t>(i)]) w += std::norm(es->vectors(i, k));
      if (w > 0.5) {
        ++cert.excluded_states;
        continue;
      }
    }
    double lam = es->values[k];
    if (lam < options.fermi)
      cert.lower_spectrum_max = std::max(cert.lower_spectrum_max, lam);
    else
      cert.upper_spectrum_min = std::min(cert.upper_spectrum_min, lam);
  }
  cert.epsilon = std::min(options.fermi - cert.lower_spectrum_max, cert.upper_spectrum_min - options.fermi);
  cert.valid = std::isfinite(cert.epsilon) && cert.epsilon > options.tolerance;
  if (use_margin) cert.method = "full diagonalization, boundary-margin excluded";
  cert.eigensystem = es;
  cert.fingerprint = fingerprint(h);
  return cert;
}

ControlledOperator flatten(const ControlledOperator& h, const GapCertificate& cert) {
  if (!cert.valid) throw ComputationError("cannot flatten: no certified spectral gap at the Fermi level");
  if (!h.hermitian()) throw UsageError("flatten needs a Hermitian operator");
  std::shared_ptr<const spectral::Eigensystem> es = cert.eigensystem;
  if (!es || cert.fingerprint != fingerprint(h))
    es = std::make_shared<spectral::Eigensystem>(spectral::eigh(h.dense()));
  Eigen::MatrixXcd s = spectral::sign_function(*es, cert.fermi);
  Eigen::MatrixXcd herm = 0.5 * (s + s.adjoint());
  return ControlledOperator::from_dense(h.module_ptr(), herm, h.module().points->diameter(), true);
}

DecayFit fit_decay(const ControlledOperator& a, double min_distance) {
  std::vector<double> env;
  const auto& m = a.matrix();
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      double d = site_distance(a.module(), static_cast<int>(it.row()), static_cast<int>(it.col()));
      auto bin = static_cast<std::size_t>(std::floor(d));
      if (bin >= env.size()) env.resize(bin + 1, 0.0);
      env[bin] = std::max(env[bin], std::abs(it.value()));
    }
  DecayFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t b = 0; b < env.size(); ++b) {
    if (env[b] <= 0) continue;
    double x = static_cast<double>(b) + 0.5;
    fit.distances.push_back(x);
    fit.envelope.push_back(env[b]);
    if (x < min_distance || env[b] < 1e-12) continue;
    double y = std::log(env[b]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++cnt;
  }
  if (cnt >= 2 && cnt * sxx - sx * sx > 0) {
    double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    double icpt = (sy - slope * sx) / cnt;
    fit.length = slope < 0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
    fit.prefactor = std::exp(icpt);
  } else {
    fit.length = std::numeric_limits<double>::infinity();
  }
  return fit;
}

}  // namespace roelab::ops
