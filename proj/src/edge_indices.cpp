#include "roelab/indices.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace roelab::idx {

using ops::cplx;

namespace {

constexpr cplx kI(0.0, 1.0);

/// Integral of exp(-1 / (1 - u^2)) over (-1, 1).
double bump_integral() {
  static const double value = [] {
    const int n = 20000;
    double s = 0;
    for (int i = 1; i < n; ++i) {
      double u = -1.0 + 2.0 * i / n;
      s += std::exp(-1.0 / (1.0 - u * u)) * ((i % 2) ? 4.0 : 2.0);
    }
    return s * (2.0 / n) / 3.0;
  }();
  return value;
}

Eigen::VectorXcd product_diagonal(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.cwiseProduct(b.transpose()).rowwise().sum();
}

Eigen::MatrixXcd dense_derivation(const Eigen::MatrixXcd& a, const Eigen::VectorXd& row_pos,
                                  const Eigen::VectorXd& col_pos) {
  Eigen::MatrixXcd out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) * cplx(0.0, row_pos[i] - col_pos[j]);
  return out;
}

/// Tangential coordinate along column k of the tangent frame, per orbital.
Eigen::VectorXd orbital_tangent(const geometry::PointSet& ps, int per_site, const EdgeGeometry& g, int k) {
  Eigen::VectorXd out(ps.size() * per_site);
  for (int x = 0; x < ps.size(); ++x) {
    double t = g.tangent.col(k).dot(ps.coord(x) - g.anchor);
    for (int a = 0; a < per_site; ++a) out[x * per_site + a] = t;
  }
  return out;
}

void check_edge_windows(const std::vector<double>& windows) {
  if (windows.empty()) throw UsageError("at least one edge window is required");
  for (std::size_t k = 0; k < windows.size(); ++k)
    if (!(windows[k] > 0) || (k > 0 && !(windows[k] > windows[k - 1])))
      throw UsageError("edge windows must be positive and strictly increasing");
}

/// Per-window edge trace of a per-orbital diagonal, normalized by (2n)^(d-1).
void edge_trace(IndexReport& r, const geometry::PointSet& ps, int per_site, const Eigen::VectorXcd& diag,
                const EdgeGeometry& g, const std::vector<double>& windows, cplx factor, const SnapTolerance& tol) {
  check_edge_windows(windows);
  std::vector<cplx> vals;
  for (double n : windows) {
    cplx s = 0;
    for (int x : edge_strip(ps, g, n))
      for (int a = 0; a < per_site; ++a) s += diag[x * per_site + a];
    vals.push_back(factor * s / std::pow(2 * n, ps.dim() - 1));
    r.window_values.push_back(vals.back().real());
  }
  r.windows = windows;
  r.raw = vals.back().real();
  r.imag = vals.back().imag();
  r.error = vals.size() > 1 ? std::abs(vals.back() - vals[vals.size() - 2]) : 0.0;
  snap(r, tol);
}

std::pair<std::vector<int>, std::vector<int>> chiral_orbitals(const sym::SymmetrySpec& spec, int orbitals) {
  if (!spec.has_P || spec.P_unitary.rows() != orbitals) throw UsageError("chiral symmetry P missing or mismatched");
  std::vector<int> plus, minus;
  for (int o = 0; o < orbitals; ++o) (spec.P_unitary(o, o).real() > 0 ? plus : minus).push_back(o);
  return {plus, minus};
}

}  // namespace

EdgeGeometry edge_geometry(const geometry::PointSet& plus_sites, const geometry::Partition& part,
                           std::optional<double> depth) {
  EdgeGeometry g;
  g.cut = part.cut;
  const int d = plus_sites.dim();
  if (plus_sites.size() == 0) throw UsageError("edge geometry needs a nonempty half-space sample");
  double smax = 0;
  for (int x = 0; x < plus_sites.size(); ++x) smax = std::max(smax, g.cut.signed_distance(plus_sites.coord(x)));
  g.depth = depth.value_or(0.5 * smax);
  if (!(g.depth > 0)) throw UsageError("edge depth must be positive");
  Eigen::VectorXd c = plus_sites.bounding_box().center();
  g.anchor = c - g.cut.signed_distance(c) * g.cut.normal;
  const Eigen::VectorXd& nv = g.cut.normal;
  if (d == 1) {
    g.tangent = Eigen::MatrixXd(1, 0);
  } else if (d == 2) {
    g.tangent = Eigen::MatrixXd(2, 1);
    g.tangent << nv[1], -nv[0];
  } else if (d == 3) {
    Eigen::Vector3d n3 = nv.head<3>();
    Eigen::Index k;
    n3.cwiseAbs().minCoeff(&k);
    Eigen::Vector3d e = Eigen::Vector3d::Unit(k);
    Eigen::Vector3d t1 = (e - e.dot(n3) * n3).normalized();
    Eigen::Vector3d t2 = t1.cross(n3);
    g.tangent = Eigen::MatrixXd(3, 2);
    g.tangent.col(0) = t1;
    g.tangent.col(1) = t2;
  } else {
    throw UsageError("edge geometry supports d <= 3");
  }
  return g;
}

std::vector<int> edge_strip(const geometry::PointSet& plus_sites, const EdgeGeometry& g, double n) {
  std::vector<int> out;
  for (int x = 0; x < plus_sites.size(); ++x) {
    auto p = plus_sites.coord(x);
    if (g.cut.signed_distance(p) >= g.depth) continue;
    Eigen::VectorXd t = g.tangent.transpose() * (p - g.anchor);
    if ((t.array() >= -n).all() && (t.array() < n).all()) out.push_back(x);
  }
  return out;
}

std::vector<double> default_edge_windows(const geometry::PointSet& plus_sites, const EdgeGeometry& g) {
  if (g.tangent.cols() == 0) return {1.0};
  double h = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < g.tangent.cols(); ++k) {
    double lo = 0, hi = 0;
    for (int x = 0; x < plus_sites.size(); ++x) {
      auto p = plus_sites.coord(x);
      if (g.cut.signed_distance(p) >= g.depth) continue;
      double t = g.tangent.col(k).dot(p - g.anchor);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    h = std::min({h, -lo, hi});
  }
  std::vector<double> out;
  for (double f : {0.4, 0.55, 0.7}) {
    double n = std::max(1.0, std::round(h * f));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

IndexReport edge_conductance(const ops::ControlledOperator& h_hat, const EdgeGeometry& g,
                             std::pair<double, double> delta, std::pair<double, double> bulk_gap,
                             const EdgeConductanceOptions& options, const SnapTolerance& tol) {
  const auto& m = h_hat.module();
  const auto& ps = *m.points;
  if (ps.dim() != 2) throw UsageError("edge conductance needs a two-dimensional half-space");
  auto [a, b] = delta;
  if (!(a < b)) throw UsageError("energy window must have a < b");
  if (!(bulk_gap.first < a && b < bulk_gap.second))
    throw UsageError("energy window is not inside the certified bulk gap");
  spectral::Eigensystem es = spectral::eigh(h_hat.dense());
  const double width = b - a;
  const double c = 2.0 / bump_integral();
  Eigen::VectorXd w = es.values.unaryExpr([&](double e) {
    if (!(e > a && e < b)) return 0.0;
    if (!options.smooth_window) return 1.0;
    double u = (2 * e - a - b) / width;
    return c * std::exp(-1.0 / (1.0 - u * u));
  });
  Eigen::MatrixXcd gd = es.vectors * w.cast<cplx>().asDiagonal() * es.vectors.adjoint();
  Eigen::VectorXd t = orbital_tangent(ps, m.orbitals, g, 0);
  Eigen::MatrixXcd dh = dense_derivation(h_hat.dense(), t, t);
  Eigen::VectorXcd diag = product_diagonal(gd, dh);
  IndexReport r;
  r.group = "Z";
  r.formula = std::string("edge_conductance: -(2 pi/|Delta|) T^(") + (options.smooth_window ? "g" : "P") +
              "_Delta(H^) d_t H^)";
  auto windows = options.windows.empty() ? default_edge_windows(ps, g) : options.windows;
  edge_trace(r, ps, m.orbitals, diag, g, windows, -2 * std::numbers::pi / width, tol);
  return r;
}

IndexReport edge_winding(const ops::SiteModule& plus_module, const Eigen::MatrixXcd& u, const EdgeGeometry& g,
                         const std::vector<double>& windows, const SnapTolerance& tol) {
  const auto& ps = *plus_module.points;
  if (ps.dim() != 2) throw UsageError("edge winding needs a two-dimensional half-space");
  if (u.rows() != plus_module.dimension() || u.cols() != u.rows())
    throw UsageError("edge unitary does not match the half-space module");
  Eigen::VectorXd t = orbital_tangent(ps, plus_module.orbitals, g, 0);
  Eigen::MatrixXcd du = dense_derivation(u, t, t);
  Eigen::VectorXcd diag = product_diagonal(u.adjoint(), du);
  IndexReport r;
  r.group = "Z";
  r.formula = "edge_winding: i T^(U^* d_t U)";
  edge_trace(r, ps, plus_module.orbitals, diag, g, windows.empty() ? default_edge_windows(ps, g) : windows, kI, tol);
  return r;
}

IndexReport edge_fredholm(const ops::ControlledOperator& h_hat, const sym::SymmetrySpec& spec,
                          const EdgeGeometry& g, const FredholmOptions& options) {
  const auto& m = h_hat.module();
  const auto& ps = *m.points;
  auto [plus, minus] = chiral_orbitals(spec, m.orbitals);
  Eigen::MatrixXcd h0 = chiral_block(h_hat, spec);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(h0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double theta = options.threshold;

  auto near = [&](int site) { return g.cut.signed_distance(ps.coord(site)) < g.depth; };
  auto weight = [&](const Eigen::MatrixXcd& vecs, Eigen::Index k, int per) {
    double s = 0;
    for (Eigen::Index i = 0; i < vecs.rows(); ++i)
      if (near(static_cast<int>(i) / per)) s += std::norm(vecs(i, k));
    return s;
  };
  const int np = static_cast<int>(plus.size()), nm = static_cast<int>(minus.size());
  // Right singular vectors beyond rank(h0) span ker h0, left ones span ker h0^*.
  double wp = 0, wm = 0, next = std::numeric_limits<double>::infinity();
  int kp = 0, km = 0;
  for (Eigen::Index k = 0; k < svd.matrixV().cols(); ++k) {
    double s = k < sv.size() ? sv[k] : 0.0;
    if (s < theta) wp += weight(svd.matrixV(), k, np), ++kp;
    else next = std::min(next, s);
  }
  for (Eigen::Index k = 0; k < svd.matrixU().cols(); ++k) {
    double s = k < sv.size() ? sv[k] : 0.0;
    if (s < theta) wm += weight(svd.matrixU(), k, nm), ++km;
  }
  IndexReport r;
  r.group = "Z";
  r.formula = "edge_fredholm: interface weight of ker H0 minus ker H0^*";
  r.raw = wp - wm;
  r.windows = {g.depth};
  r.window_values = {r.raw};
  if (next <= options.separation * theta)
    r.warnings.push_back("smallest nonzero singular value " + std::to_string(next) +
                         " is not separated from the kernel threshold");
  snap(r);
  if (next <= options.separation * theta) r.snapped_ok = false;
  r.warnings.push_back("kernel dimensions: " + std::to_string(kp) + " / " + std::to_string(km));
  return r;
}

IndexReport edge_majorana(const ops::ControlledOperator& h_hat, const EdgeGeometry& g,
                          const FredholmOptions& options) {
  const auto& m = h_hat.module();
  const auto& ps = *m.points;
  spectral::Eigensystem es = spectral::eigh(h_hat.dense());
  const double theta = options.threshold;
  double w = 0, next = std::numeric_limits<double>::infinity();
  int count = 0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    if (std::abs(es.values[k]) < theta) {
      ++count;
      for (Eigen::Index i = 0; i < es.vectors.rows(); ++i)
        if (g.cut.signed_distance(ps.coord(m.site_of(static_cast<int>(i)))) < g.depth) w += std::norm(es.vectors(i, k));
    } else {
      next = std::min(next, std::abs(es.values[k]));
    }
  }
  IndexReport r;
  r.group = "Z2";
  r.is_z2 = true;
  r.formula = "edge_majorana: interface weight of the near-zero modes mod 2";
  r.raw = w;
  r.windows = {g.depth};
  r.window_values = {w};
  snap(r);
  if (next <= options.separation * theta) {
    r.snapped_ok = false;
    r.warnings.push_back("near-zero modes are not separated from the rest of the spectrum");
  }
  r.warnings.push_back("near-zero modes: " + std::to_string(count));
  return r;
}

IndexReport edge_chiral_3d(const ops::ControlledOperator& flat_hat, const sym::SymmetrySpec& spec,
                           const EdgeGeometry& g, const std::vector<double>& windows, const SnapTolerance& tol) {
  const auto& m = flat_hat.module();
  const auto& ps = *m.points;
  if (ps.dim() != 3) throw UsageError("edge_chiral_3d needs a three-dimensional half-space");
  Eigen::MatrixXcd v = chiral_block(flat_hat, spec);
  if (v.rows() != v.cols()) throw UsageError("chiral block is not square");
  const Eigen::Index n = v.cols();
  const int per = static_cast<int>(n) / m.sites();
  spectral::Eigensystem vv = spectral::eigh(v.adjoint() * v);
  Eigen::VectorXd root = vv.values.unaryExpr([](double x) { return std::sqrt(std::clamp(1.0 - x, 0.0, 1.0)); });
  Eigen::MatrixXcd s = vv.vectors * root.cast<cplx>().asDiagonal() * vv.vectors.adjoint();
  Eigen::MatrixXcd e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = v * v.adjoint();
  e.topRightCorner(n, n) = -v * s;
  e.bottomLeftCorner(n, n) = -s * v.adjoint();
  e.bottomRightCorner(n, n) = Eigen::MatrixXcd::Identity(n, n) - v.adjoint() * v;
  if ((e * e - e).cwiseAbs().maxCoeff() > 1e-8) throw ComputationError("dilation of the compressed chiral block is not a projection");

  // Both copies are indexed by the same sites: orbital k of copy c at site x is row c*n + x*per + k.
  Eigen::VectorXd t1(2 * n), t2(2 * n);
  Eigen::VectorXd a1 = orbital_tangent(ps, per, g, 0), a2 = orbital_tangent(ps, per, g, 1);
  t1 << a1, a1;
  t2 << a2, a2;
  Eigen::MatrixXcd d1 = dense_derivation(e, t1, t1), d2 = dense_derivation(e, t2, t2);
  Eigen::MatrixXcd c = d1 * d2;
  c.noalias() -= d2 * d1;
  Eigen::VectorXcd full = product_diagonal(e, c);
  Eigen::VectorXcd diag = full.head(n) + full.tail(n);
  IndexReport r;
  r.group = "Z";
  r.formula = "edge_chiral_3d: 2 pi i T^(e[d_t1 e, d_t2 e]), e the dilation projection of the compressed U";
  edge_trace(r, ps, per, diag, g, windows.empty() ? default_edge_windows(ps, g) : windows,
             2 * std::numbers::pi * kI, tol);
  return r;
}

}  // namespace roelab::idx
