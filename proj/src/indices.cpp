#include "roelab/indices.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace roelab::idx {

using ops::cplx;
constexpr cplx kI(0.0, 1.0);

std::string IndexReport::snapped_text() const {
  if (!snapped_ok) return "unsnapped";
  return is_z2 ? "Z2:" + std::to_string(snapped) : std::to_string(snapped);
}

void snap(IndexReport& r, const SnapTolerance& tol) {
  double k = std::round(r.raw);
  if (r.is_z2) {
    r.snapped_ok = std::abs(r.raw - k) <= tol.z2;
    r.snapped = static_cast<int>(((static_cast<long long>(k) % 2) + 2) % 2);
  } else {
    r.snapped_ok = std::abs(r.raw - k) <= tol.integer;
    r.snapped = static_cast<int>(k);
  }
  if (!r.snapped_ok)
    r.warnings.push_back("raw value " + std::to_string(r.raw) + " is not within the snap tolerance of an integer");
}

Eigen::VectorXd sample_center(const geometry::PointSet& ps) { return ps.bounding_box().center(); }

std::vector<int> window_sites(const geometry::PointSet& ps, const Eigen::VectorXd& center, double n) {
  std::vector<int> out;
  for (int j = 0; j < ps.size(); ++j) {
    bool in = true;
    for (int a = 0; a < ps.dim() && in; ++a) {
      double v = ps.coord(j)[a] - center[a];
      in = v >= -n && v < n;
    }
    if (in) out.push_back(j);
  }
  return out;
}

std::vector<double> default_windows(const geometry::PointSet& ps) {
  geometry::Box bb = ps.bounding_box();
  double h = ((bb.hi - bb.lo) * 0.5).minCoeff();
  std::vector<double> out;
  for (double f : {0.55, 0.7, 0.85}) {
    double n = std::max(1.0, std::round(h * f));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

namespace {

void check_windows(const geometry::PointSet& ps, const std::vector<double>& windows, double margin) {
  if (windows.empty()) throw UsageError("at least one trace window is required");
  for (std::size_t k = 0; k < windows.size(); ++k) {
    if (!(windows[k] > 0)) throw UsageError("trace windows must be positive");
    if (k > 0 && !(windows[k] > windows[k - 1])) throw UsageError("trace windows must be strictly increasing");
  }
  Eigen::VectorXd c = sample_center(ps);
  const auto& w = ps.window();
  double n = windows.back() + margin;
  for (int a = 0; a < ps.dim(); ++a)
    if (c[a] - n < w.lo[a] - 1e-9 || c[a] + n > w.hi[a] + 1e-9)
      throw UsageError("trace window of radius " + std::to_string(windows.back()) + " exceeds the sample");
}

/// Per-window sums of a per-orbital diagonal.
TraceEstimate window_sums(const ops::SiteModule& m, const Eigen::VectorXcd& diag, const std::vector<double>& windows,
                          bool per_volume) {
  TraceEstimate t;
  const auto& ps = *m.points;
  Eigen::VectorXd c = sample_center(ps);
  for (double n : windows) {
    auto sites = window_sites(ps, c, n);
    cplx s = 0;
    for (int x : sites)
      for (int a = 0; a < m.orbitals; ++a) s += diag[m.index(x, a)];
    double vol = std::pow(2 * n, ps.dim());
    t.windows.push_back(n);
    t.counts.push_back(static_cast<int>(sites.size()));
    t.volumes.push_back(vol);
    double norm = per_volume ? vol : static_cast<double>(std::max<std::size_t>(sites.size(), 1));
    t.values.push_back(s / norm);
  }
  t.extrapolated = t.values.back();
  t.error = t.values.size() > 1 ? std::abs(t.values.back() - t.values[t.values.size() - 2]) : 0.0;
  return t;
}

Eigen::MatrixXd orbital_positions(const ops::SiteModule& m) {
  Eigen::MatrixXd x(m.points->dim(), m.dimension());
  for (int i = 0; i < m.dimension(); ++i) x.col(i) = m.points->coord(m.site_of(i));
  return x;
}

/// i (x_r - y_c) . dir  entrywise on a dense matrix.
Eigen::MatrixXcd dense_derivation(const Eigen::MatrixXcd& a, const Eigen::RowVectorXd& row_pos,
                                  const Eigen::RowVectorXd& col_pos) {
  Eigen::MatrixXcd out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) * cplx(0.0, row_pos[i] - col_pos[j]);
  return out;
}

/// diag(A B) without forming the product.
Eigen::VectorXcd product_diagonal(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.cwiseProduct(b.transpose()).rowwise().sum();
}

IndexReport finish(IndexReport r, const TraceEstimate& t, cplx factor, const SnapTolerance& tol) {
  for (const auto& v : t.values) r.window_values.push_back((factor * v).real());
  r.windows = t.windows;
  cplx raw = factor * t.extrapolated;
  r.raw = raw.real();
  r.imag = raw.imag();
  r.error = std::abs(factor) * t.error;
  snap(r, tol);
  return r;
}

}  // namespace

TraceEstimate trace_per_unit_volume(const ops::SiteModule& module, const Eigen::MatrixXcd& a,
                                    const std::vector<double>& windows) {
  check_windows(*module.points, windows, 0.0);
  return window_sums(module, a.diagonal(), windows, false);
}

TraceEstimate trace_per_unit_volume(const ops::ControlledOperator& a, const std::vector<double>& windows) {
  const auto& ps = *a.module().points;
  geometry::Box bb = ps.bounding_box();
  double half = ((bb.hi - bb.lo) * 0.5).minCoeff();
  double prop = ops::propagation(a);
  check_windows(ps, windows, prop < half ? prop : 0.0);
  Eigen::VectorXcd d = a.matrix().diagonal();
  return window_sums(a.module(), d, windows, false);
}

ops::ControlledOperator negative_projection(const ops::ControlledOperator& s) {
  return (ops::ControlledOperator::identity(s.module_ptr()) - s).scaled(0.5);
}

IndexReport chern_even(const ops::ControlledOperator& projection, const std::vector<double>& windows,
                       const SnapTolerance& tol) {
  const auto& m = projection.module();
  if (m.points->dim() != 2) throw UsageError("chern_even needs a two-dimensional sample");
  check_windows(*m.points, windows, 0.0);
  Eigen::MatrixXcd p = projection.dense();
  if ((p - p.adjoint()).cwiseAbs().maxCoeff() > 1e-10 || (p * p - p).cwiseAbs().maxCoeff() > 1e-8)
    throw UsageError("chern_even input is not an orthogonal projection");
  Eigen::MatrixXd x = orbital_positions(m);
  Eigen::MatrixXcd a = dense_derivation(p, x.row(0), x.row(0));
  Eigen::MatrixXcd b = dense_derivation(p, x.row(1), x.row(1));
  Eigen::MatrixXcd c(p.rows(), p.cols());
  c.noalias() = b * a;
  c.noalias() -= a * b;
  Eigen::VectorXcd d = product_diagonal(p, c);
  IndexReport r;
  r.formula = "chern_even: 2 pi i T(P[d2 P, d1 P])";
  r.group = "Z";
  r = finish(r, window_sums(m, d, windows, true), 2 * std::numbers::pi * kI, tol);
  if (std::abs(r.imag) > 1e-8) r.warnings.push_back("pairing has an imaginary part above 1e-8");
  return r;
}

Eigen::MatrixXcd chiral_block(const ops::ControlledOperator& a, const sym::SymmetrySpec& spec) {
  if (!spec.has_P) throw UsageError("chiral block needs a chiral symmetry P");
  const int orb = a.module().orbitals;
  const Eigen::MatrixXcd& pu = spec.P_unitary;
  if (pu.rows() != orb) throw UsageError("P does not match the orbital dimension");
  std::vector<int> plus, minus;
  for (int o = 0; o < orb; ++o) {
    for (int o2 = 0; o2 < orb; ++o2)
      if (o2 != o && std::abs(pu(o, o2)) > 1e-12) throw UsageError("P must be diagonal in the orbital basis");
    if (std::abs(pu(o, o) - 1.0) < 1e-12) plus.push_back(o);
    else if (std::abs(pu(o, o) + 1.0) < 1e-12) minus.push_back(o);
    else throw UsageError("P must have diagonal entries +-1");
  }
  const int n = a.module().sites();
  std::vector<int> rows, cols;
  for (int x = 0; x < n; ++x) {
    for (int o : minus) rows.push_back(a.module().index(x, o));
    for (int o : plus) cols.push_back(a.module().index(x, o));
  }
  Eigen::MatrixXcd d = a.dense();
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d(rows[i], cols[j]);
  return out;
}

IndexReport chern_odd(const ops::ControlledOperator& flat, const sym::SymmetrySpec& spec,
                      const std::vector<double>& windows, const SnapTolerance& tol) {
  const auto& m = flat.module();
  const int d = m.points->dim();
  if (d != 1 && d != 3) throw UsageError("chern_odd supports d = 1 and d = 3");
  if (!spec.has_P) throw UsageError("chern_odd needs a chiral symmetry P");
  auto rep = sym::verify_symmetry(flat, sym::SymmetrySpec{.has_P = true, .P_unitary = spec.P_unitary}, 1e-8);
  if (!rep.pass) throw UsageError("operator violates the chiral symmetry by " + std::to_string(rep.max_violation));
  check_windows(*m.points, windows, 0.0);

  Eigen::MatrixXcd u = chiral_block(flat, spec);
  if (u.rows() != u.cols()) throw UsageError("chiral block is not square: unequal numbers of +/- orbitals");
  const int per = static_cast<int>(u.cols()) / m.sites();
  Eigen::MatrixXd pos(d, u.cols());
  for (Eigen::Index i = 0; i < u.cols(); ++i) pos.col(i) = m.points->coord(static_cast<int>(i) / per);

  std::vector<Eigen::MatrixXcd> g;
  for (int a = 0; a < d; ++a) {
    Eigen::MatrixXcd du = dense_derivation(u, pos.row(a), pos.row(a));
    g.emplace_back(u.adjoint() * du);
  }
  Eigen::VectorXcd diag;
  cplx factor;
  if (d == 1) {
    diag = g[0].diagonal();
    factor = kI;
  } else {
    diag = Eigen::VectorXcd::Zero(u.cols());
    const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    for (int k = 0; k < 6; ++k) {
      Eigen::MatrixXcd ab = g[perms[k][0]] * g[perms[k][1]];
      diag += (k < 3 ? 1.0 : -1.0) * product_diagonal(ab, g[perms[k][2]]);
    }
    factor = kI * (kI * std::numbers::pi) / 3.0;
  }
  // Sum the per-orbital diagonal over sites by embedding it on a module with `per` orbitals.
  auto half = std::make_shared<ops::SiteModule>(m);
  half->orbitals = per;
  half->grading = Eigen::VectorXi::Ones(per);
  IndexReport r;
  r.formula = d == 1 ? "chern_odd d=1: i T(U* d1 U)" : "chern_odd d=3: -(pi/3) sum_sigma sgn T(U* d U U* d U U* d U)";
  r.group = "Z";
  return finish(r, window_sums(*half, diag, windows, true), factor, tol);
}

ops::ControlledOperator spin_sector(const ops::ControlledOperator& h, int spin, double tol) {
  const auto& m = h.module();
  if (!m.spin) throw UsageError("module carries no spin labels");
  std::vector<int> keep;
  for (int o = 0; o < m.orbitals; ++o)
    if ((*m.spin)[o] == spin) keep.push_back(o);
  if (keep.empty()) throw UsageError("no orbitals with the requested spin");
  double leak = 0;
  const auto& mat = h.matrix();
  for (int r = 0; r < mat.outerSize(); ++r)
    for (ops::SparseMatrix::InnerIterator it(mat, r); it; ++it) {
      int a = static_cast<int>(it.row()) % m.orbitals, b = static_cast<int>(it.col()) % m.orbitals;
      if ((*m.spin)[a] != (*m.spin)[b]) leak = std::max(leak, std::abs(it.value()));
    }
  if (leak > tol)
    throw UsageError("Hamiltonian does not conserve spin-z (max spin-flip entry " + std::to_string(leak) +
                     "); the spin-resolved Z2 formula needs [H, S_z] = 0");
  const int k = static_cast<int>(keep.size());
  auto sub = std::make_shared<ops::SiteModule>(m);
  sub->orbitals = k;
  sub->grading = Eigen::VectorXi(k);
  Eigen::VectorXi sp(k);
  for (int i = 0; i < k; ++i) sub->grading[i] = m.grading[keep[static_cast<std::size_t>(i)]], sp[i] = spin;
  sub->spin = sp;
  std::vector<int> map(static_cast<std::size_t>(m.orbitals), -1);
  for (int i = 0; i < k; ++i) map[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])] = i;
  std::vector<Eigen::Triplet<cplx>> t;
  for (int r = 0; r < mat.outerSize(); ++r)
    for (ops::SparseMatrix::InnerIterator it(mat, r); it; ++it) {
      int a = map[static_cast<std::size_t>(it.row() % m.orbitals)], b = map[static_cast<std::size_t>(it.col() % m.orbitals)];
      if (a < 0 || b < 0) continue;
      t.emplace_back(static_cast<int>(it.row() / m.orbitals) * k + a, static_cast<int>(it.col() / m.orbitals) * k + b,
                     it.value());
    }
  ops::SparseMatrix s(sub->dimension(), sub->dimension());
  s.setFromTriplets(t.begin(), t.end());
  return ops::ControlledOperator(sub, std::move(s), h.declared_propagation(), h.hermitian());
}

IndexReport kane_mele(const ops::ControlledOperator& h, const sym::SymmetrySpec& spec,
                      const std::vector<double>& windows, double fermi, const SnapTolerance& tol) {
  if (!spec.has_T || spec.T_sq != -1) throw UsageError("kane_mele needs a time reversal with T^2 = -1");
  auto rep = sym::verify_symmetry(h, sym::SymmetrySpec{.has_T = true, .T_sq = -1, .T_unitary = spec.T_unitary}, 1e-8);
  if (!rep.pass) throw UsageError("Hamiltonian violates time reversal by " + std::to_string(rep.max_violation));
  ops::ControlledOperator up = spin_sector(h, 1);
  auto cert = ops::certify_gap(up, {.fermi = fermi});
  if (!cert.valid) throw ComputationError("spin-up sector has no certified gap at the Fermi level");
  auto s = ops::flatten(up, cert);
  IndexReport c = chern_even(negative_projection(s), windows, tol);
  c.formula = "kane_mele: spin-up chern_even mod 2";
  c.group = "Z2";
  c.is_z2 = true;
  c.warnings.clear();
  snap(c, tol);
  return c;
}

int pfaffian_sign(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw UsageError("Pfaffian needs a square matrix");
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw UsageError("Pfaffian needs a skew-symmetric matrix");
  if (n % 2 == 1) return 0;
  int sign = 1;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    Eigen::Index kp;
    a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&kp);
    kp += k + 1;
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      sign = -sign;
    }
    if (a(k + 1, k) == 0.0) return 0;
    if (a(k, k + 1) < 0) sign = -sign;
    if (k + 2 < n) {
      Eigen::VectorXd tau = a.row(k).tail(n - k - 2).transpose() / a(k, k + 1);
      Eigen::VectorXd col = a.col(k + 1).tail(n - k - 2);
      a.bottomRightCorner(n - k - 2, n - k - 2) += tau * col.transpose() - col * tau.transpose();
    }
  }
  return sign;
}

IndexReport majorana_number(const models::ModelConfig& config, geometry::PointSetPtr points) {
  int product = 1;
  for (const char* b : {"periodic", "antiperiodic"}) {
    models::ModelConfig c = config;
    c.boundary = b;
    auto model = models::build_model(c, points);
    if (!model.spec.has_C || model.spec.C_sq != 1 || model.module->orbitals != 2)
      throw UsageError("Majorana number needs a class D chain with Nambu pairs (c, c^dagger) per site");
    auto cert = ops::certify_gap(model.H);
    if (!cert.valid) throw ComputationError(std::string("ring closure (") + b + ") is gapless");
    const int n = model.module->dimension();
    // Majorana operators a = c + c^dag, b = -i (c - c^dag): (c, c^dag) = V (a, b).
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);
    for (int x = 0; x < model.module->sites(); ++x) {
      v(2 * x, 2 * x) = 0.5;
      v(2 * x, 2 * x + 1) = 0.5 * kI;
      v(2 * x + 1, 2 * x) = 0.5;
      v(2 * x + 1, 2 * x + 1) = -0.5 * kI;
    }
    Eigen::MatrixXcd bm = v.adjoint() * model.H.dense() * v;
    if (bm.real().cwiseAbs().maxCoeff() > 1e-10)
      throw ComputationError("Majorana form of the Hamiltonian is not purely imaginary");
    product *= pfaffian_sign(bm.imag());
  }
  IndexReport r;
  r.formula = "majorana_number: sgn Pf(periodic) sgn Pf(antiperiodic)";
  r.group = "Z2";
  r.is_z2 = true;
  r.raw = product == 0 ? 0.5 : (1 - product) / 2.0;
  snap(r);
  return r;
}

}  // namespace roelab::idx
