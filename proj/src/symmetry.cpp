#include "roelab/symmetry.hpp"

#include <cmath>
#include <random>

namespace roelab::sym {

namespace {

void check_square(const Eigen::MatrixXcd& u, const char* name, double tol) {
  if (u.rows() == 0 || u.rows() != u.cols())
    throw UsageError(std::string(name) + " unitary part must be a nonempty square matrix");
  if (!(u.adjoint() * u).isIdentity(tol)) throw UsageError(std::string(name) + " unitary part is not unitary");
}

void check_sign(int s, const char* name) {
  if (s != 1 && s != -1) throw UsageError(std::string(name) + " must be +1 or -1");
}

using ops::SparseMatrix;

SparseMatrix block_diagonal(const ops::SiteModule& m, const Eigen::MatrixXcd& u) {
  if (u.rows() != m.orbitals || u.cols() != m.orbitals)
    throw UsageError("symmetry block does not match the orbital dimension");
  std::vector<Eigen::Triplet<ops::cplx>> t;
  for (int x = 0; x < m.sites(); ++x)
    for (int a = 0; a < m.orbitals; ++a)
      for (int b = 0; b < m.orbitals; ++b)
        if (std::abs(u(a, b)) > 0) t.emplace_back(m.index(x, a), m.index(x, b), u(a, b));
  SparseMatrix s(m.dimension(), m.dimension());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

/// Partial permutation W with W_{g.x, x} = block, and the indicator of the image sites.
std::pair<SparseMatrix, SparseMatrix> group_operator(const ops::SiteModule& m, const std::vector<int>& perm,
                                                     const Eigen::MatrixXcd& block) {
  if (block.rows() != m.orbitals || block.cols() != m.orbitals)
    throw UsageError("point-group block does not match the orbital dimension");
  if (static_cast<int>(perm.size()) != m.sites()) throw UsageError("site permutation has the wrong size");
  std::vector<Eigen::Triplet<ops::cplx>> w, chi;
  for (int x = 0; x < m.sites(); ++x) {
    int gx = perm[static_cast<std::size_t>(x)];
    if (gx < 0) continue;
    for (int a = 0; a < m.orbitals; ++a) {
      chi.emplace_back(m.index(gx, a), m.index(gx, a), 1.0);
      for (int b = 0; b < m.orbitals; ++b)
        if (std::abs(block(a, b)) > 0) w.emplace_back(m.index(gx, a), m.index(x, b), block(a, b));
    }
  }
  SparseMatrix W(m.dimension(), m.dimension()), X(m.dimension(), m.dimension());
  W.setFromTriplets(w.begin(), w.end());
  X.setFromTriplets(chi.begin(), chi.end());
  return {W, X};
}

template <class Measure>
SymmetryReport verify_impl(const ops::ControlledOperator& h, const SymmetrySpec& spec, double tol,
                           Measure measure) {
  SymmetryReport r;
  auto record = [&](SymmetryKind k, std::optional<double>& slot) {
    ops::ControlledOperator img = symmetry_image(h, spec, k);
    slot = 0.5 * measure(SparseMatrix(h.matrix() - img.matrix()));
    r.max_violation = std::max(r.max_violation, *slot);
  };
  if (spec.has_T) record(SymmetryKind::T, r.T_violation);
  if (spec.has_C) record(SymmetryKind::C, r.C_violation);
  if (spec.has_P) record(SymmetryKind::P, r.P_violation);
  if (spec.group) {
    const auto& g = *spec.group;
    for (std::size_t e = 0; e < g.elements.size(); ++e) {
      auto [W, X] = group_operator(h.module(), g.site_permutation[e], g.onsite_blocks[e]);
      SparseMatrix img = W * h.matrix() * SparseMatrix(W.adjoint());
      SparseMatrix ref = X * h.matrix() * X;
      double v = 0.5 * measure(SparseMatrix(ref - img));
      r.group_violations.push_back(v);
      r.max_violation = std::max(r.max_violation, v);
    }
  }
  r.pass = r.max_violation <= tol;
  return r;
}

}  // namespace

int SymmetrySpec::orbitals() const {
  if (has_T) return static_cast<int>(T_unitary.rows());
  if (has_C) return static_cast<int>(C_unitary.rows());
  if (has_P) return static_cast<int>(P_unitary.rows());
  return 0;
}

void SymmetrySpec::validate(double tol) const {
  if (has_T) {
    check_sign(T_sq, "T^2");
    check_square(T_unitary, "T", tol);
    if (!(T_unitary * T_unitary.conjugate()).isApprox(T_sq * Eigen::MatrixXcd::Identity(T_unitary.rows(), T_unitary.rows()), tol))
      throw UsageError("T unitary part does not square to the declared T^2");
  }
  if (has_C) {
    check_sign(C_sq, "C^2");
    check_square(C_unitary, "C", tol);
    if (!(C_unitary * C_unitary.conjugate()).isApprox(C_sq * Eigen::MatrixXcd::Identity(C_unitary.rows(), C_unitary.rows()), tol))
      throw UsageError("C unitary part does not square to the declared C^2");
  }
  if (has_P) check_square(P_unitary, "P", tol);
  if (has_T && has_C) {
    if (!has_P) throw UsageError("T and C together require the chiral symmetry P = CT");
    if (T_unitary.rows() != C_unitary.rows() || P_unitary.rows() != T_unitary.rows())
      throw UsageError("symmetry unitary parts have different dimensions");
    Eigen::MatrixXcd ct = C_unitary * T_unitary.conjugate();
    double overlap = std::abs((P_unitary.adjoint() * ct).trace());
    if (std::abs(overlap - static_cast<double>(P_unitary.rows())) > 1e-8)
      throw UsageError("P is not CT up to a phase");
  } else if (has_P && (has_T || has_C)) {
    throw UsageError("P with a single antiunitary symmetry: declare both T and C");
  }
  for (auto s : {CR_sign, TR_sign, PR_sign})
    if (s) check_sign(*s, "reflection sign");
}

SymmetrySpec no_symmetry() { return {}; }

SymmetrySpec chiral_from_grading(const ops::SiteModule& module) {
  SymmetrySpec s;
  s.has_P = true;
  s.P_unitary = module.grading.cast<std::complex<double>>().asDiagonal();
  return s;
}

CartanLabel classify(const SymmetrySpec& spec) {
  if (spec.has_T) check_sign(spec.T_sq, "T^2");
  if (spec.has_C) check_sign(spec.C_sq, "C^2");
  if (spec.has_T && spec.has_C) {
    if (spec.C_sq == 1) return spec.T_sq == 1 ? CartanLabel::BDI : CartanLabel::DIII;
    return spec.T_sq == 1 ? CartanLabel::CI : CartanLabel::CII;
  }
  if (spec.has_T) return spec.T_sq == 1 ? CartanLabel::AI : CartanLabel::AII;
  if (spec.has_C) return spec.C_sq == 1 ? CartanLabel::D : CartanLabel::C;
  if (spec.has_P) return CartanLabel::AIII;
  return CartanLabel::A;
}

Eigen::MatrixXcd symmetry_image(const Eigen::MatrixXcd& block, const SymmetrySpec& spec, SymmetryKind kind) {
  switch (kind) {
    case SymmetryKind::T: return spec.T_unitary * block.conjugate() * spec.T_unitary.adjoint();
    case SymmetryKind::C: return -(spec.C_unitary * block.conjugate() * spec.C_unitary.adjoint());
    case SymmetryKind::P: return -(spec.P_unitary * block * spec.P_unitary.adjoint());
  }
  return block;
}

ops::ControlledOperator symmetry_image(const ops::ControlledOperator& h, const SymmetrySpec& spec,
                                       SymmetryKind kind) {
  const auto& m = h.module();
  SparseMatrix img;
  switch (kind) {
    case SymmetryKind::T: {
      if (!spec.has_T) throw UsageError("spec has no T");
      SparseMatrix U = block_diagonal(m, spec.T_unitary);
      img = U * SparseMatrix(h.matrix().conjugate()) * SparseMatrix(U.adjoint());
      break;
    }
    case SymmetryKind::C: {
      if (!spec.has_C) throw UsageError("spec has no C");
      SparseMatrix U = block_diagonal(m, spec.C_unitary);
      img = -(U * SparseMatrix(h.matrix().conjugate()) * SparseMatrix(U.adjoint()));
      break;
    }
    case SymmetryKind::P: {
      if (!spec.has_P) throw UsageError("spec has no P");
      SparseMatrix U = block_diagonal(m, spec.P_unitary);
      img = -(U * h.matrix() * SparseMatrix(U.adjoint()));
      break;
    }
  }
  img.prune([](Eigen::Index, Eigen::Index, const ops::cplx& v) { return std::abs(v) > ops::kZero; });
  return ops::ControlledOperator(h.module_ptr(), std::move(img), h.declared_propagation(), h.hermitian());
}

namespace {

ops::ControlledOperator symmetrize(const ops::ControlledOperator& a, const SymmetrySpec& spec) {
  std::vector<ops::ControlledOperator> images{a};
  if (spec.has_T) images.push_back(symmetry_image(a, spec, SymmetryKind::T));
  if (spec.has_C) images.push_back(symmetry_image(a, spec, SymmetryKind::C));
  if (spec.has_P) images.push_back(symmetry_image(a, spec, SymmetryKind::P));
  SparseMatrix sum = images.front().matrix();
  for (std::size_t k = 1; k < images.size(); ++k) sum += images[k].matrix();
  sum *= 1.0 / static_cast<double>(images.size());
  sum.prune([](Eigen::Index, Eigen::Index, const ops::cplx& v) { return std::abs(v) > ops::kZero; });
  return ops::ControlledOperator(a.module_ptr(), std::move(sum), a.declared_propagation(), a.hermitian());
}

/// Symmetric involution on the Fermi-level eigenspace Q: sign of a symmetrized random
/// Hermitian operator compressed to Q, or nullopt when every draw is singular there.
std::optional<Eigen::MatrixXcd> kernel_sign(const ops::ControlledOperator& h, const Eigen::MatrixXcd& q,
                                            const SymmetrySpec& spec) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  const Eigen::Index k = q.cols();
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXcd x(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) x(i, j) = ops::cplx(g(rng), g(rng));
    Eigen::MatrixXcd m = q * (x + x.adjoint()) * q.adjoint();
    auto sym = symmetrize(ops::ControlledOperator::from_dense(h.module_ptr(), m, std::nullopt, true), spec);
    Eigen::MatrixXcd mk = q.adjoint() * sym.dense() * q;
    auto es = spectral::eigh(0.5 * (mk + mk.adjoint()));
    double scale = es.values.cwiseAbs().maxCoeff();
    if (!(scale > 0) || es.values.cwiseAbs().minCoeff() < 1e-6 * scale) continue;
    return q * spectral::sign_function(es, 0.0) * q.adjoint();
  }
  return std::nullopt;
}

}  // namespace

ops::ControlledOperator symmetric_flatten(const ops::ControlledOperator& h, const ops::GapCertificate& cert,
                                          const SymmetrySpec& spec) {
  ops::ControlledOperator s = ops::flatten(h, cert);
  std::shared_ptr<const spectral::Eigensystem> es = cert.eigensystem;
  if (!es || cert.fingerprint != ops::fingerprint(h))
    es = std::make_shared<spectral::Eigensystem>(spectral::eigh(h.dense()));
  const double scale = std::max(1.0, es->values.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> zero;
  for (Eigen::Index k = 0; k < es->values.size(); ++k)
    if (std::abs(es->values[k] - cert.fermi) < 1e-9 * scale) zero.push_back(k);
  if (zero.empty()) return symmetrize(s, spec);

  Eigen::MatrixXcd q(es->vectors.rows(), static_cast<Eigen::Index>(zero.size()));
  for (std::size_t k = 0; k < zero.size(); ++k) q.col(static_cast<Eigen::Index>(k)) = es->vectors.col(zero[k]);
  if (auto sk = kernel_sign(h, q, spec)) {
    Eigen::MatrixXcd d = s.dense();
    // replace sgn on the Fermi-level eigenspace
    d += *sk - q * (q.adjoint() * d * q) * q.adjoint();
    d = 0.5 * (d + d.adjoint());
    s = ops::ControlledOperator::from_dense(s.module_ptr(), d, s.declared_propagation(), true);
  }
  return symmetrize(s, spec);
}

SymmetryReport verify_symmetry(const ops::ControlledOperator& h, const SymmetrySpec& spec, double tol) {
  return verify_impl(h, spec, tol, [](const SparseMatrix& d) { return ops::max_entry(d); });
}

SymmetryReport verify_symmetry_norm(const ops::ControlledOperator& h, const SymmetrySpec& spec, double tol) {
  return verify_impl(h, spec, tol, [](const SparseMatrix& d) {
    return spectral::operator_norm(Eigen::MatrixXcd(d));
  });
}

}  // namespace roelab::sym
