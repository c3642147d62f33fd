#pragma once

#include "roelab/operators.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace roelab::sym {

enum class CartanLabel { A, AIII, AI, BDI, D, DIII, AII, CII, C, CI };

inline constexpr std::array<CartanLabel, 10> kAllLabels = {
    CartanLabel::A,   CartanLabel::AIII, CartanLabel::AI,  CartanLabel::BDI, CartanLabel::D,
    CartanLabel::DIII, CartanLabel::AII, CartanLabel::CII, CartanLabel::C,   CartanLabel::CI};

std::string to_string(CartanLabel label);
CartanLabel label_from_string(const std::string& s);
bool is_complex(CartanLabel label);
/// K-theory degree of the class: K_j for complex labels (j in {0, 1}), KR_j otherwise (j mod 8).
int degree(CartanLabel label);

/// CT-type symmetry data. Antiunitaries act as (unitary part) followed by complex conjugation;
/// all unitary parts act on the orbital space of one site.
struct SymmetrySpec {
  bool has_T = false, has_C = false, has_P = false;
  int T_sq = 0, C_sq = 0;
  Eigen::MatrixXcd T_unitary, C_unitary, P_unitary;
  /// Reflection data: signs of CR = +-RC, TR = +-RT, PR = +-RP (PR is derived when C and T exist).
  std::optional<int> CR_sign, TR_sign, PR_sign;
  /// Point-group elements with their on-site blocks; H must commute with each.
  std::optional<geometry::GroupAction> group;

  /// Throws UsageError when the invariants fail (signs, squares, P = CT up to phase).
  void validate(double tol = 1e-10) const;
  int orbitals() const;
};

SymmetrySpec no_symmetry();
/// Spec with only the chiral symmetry P given by the module grading.
SymmetrySpec chiral_from_grading(const ops::SiteModule& module);

CartanLabel classify(const SymmetrySpec& spec);

/// Finitely generated abelian group Z^a + Z2^b.
struct KGroup {
  int z = 0;
  int z2 = 0;
  std::string provenance;

  std::string render() const;
  bool operator==(const KGroup& o) const { return z == o.z && z2 == o.z2; }
  KGroup& operator+=(const KGroup& o);
  KGroup times(int k) const;
};

KGroup KR(int n);        ///< real K-theory of a point, degree n mod 8
KGroup Kc(int n);        ///< complex K-theory of a point, degree n mod 2
KGroup KQ(int n);        ///< quaternionic: KR_{n+4}

KGroup kgroup_point(CartanLabel label, int d);
KGroup kgroup_rotation(CartanLabel label, int d, int k);
KGroup kgroup_reflection(const SymmetrySpec& spec, int d);

struct CharacterTable {
  int order = 1;
  std::vector<int> class_sizes;
  std::vector<int> square_class;
  std::vector<std::vector<std::complex<double>>> chars;

  /// Row and column orthogonality to `tol`; throws UsageError otherwise.
  void validate(double tol = 1e-9) const;
};

CharacterTable cyclic_character_table(int k);

struct FrobeniusSchurSplit {
  int n1 = 0, n0 = 0, n_minus1 = 0;
  std::vector<int> indicators;
};

FrobeniusSchurSplit frobenius_schur_split(const CharacterTable& ct);
/// KR^G = KR^{n1} + K^{n0/2} + KQ^{n-1} at the degree of a real label; K^{|Irr|} for complex labels.
KGroup kgroup_group(CartanLabel label, int d, const CharacterTable& ct);

// ---------------------------------------------------------------------------
// Symmetry action on operators

enum class SymmetryKind { T, C, P };

/// The image S(H) that equals H for an exact symmetry: U conj(H) U^* for T,
/// -U conj(H) U^* for C, -U H U^* for P.
ops::ControlledOperator symmetry_image(const ops::ControlledOperator& h, const SymmetrySpec& spec,
                                       SymmetryKind kind);
Eigen::MatrixXcd symmetry_image(const Eigen::MatrixXcd& block, const SymmetrySpec& spec, SymmetryKind kind);

/// flatten, symmetrized. Only eigenvalues within 1e-9 of the Fermi level (e.g. exact zero modes
/// at the ends of an open chain) are treated specially: there sgn is replaced by the sign of a
/// symmetrized random Hermitian operator compressed to that eigenspace, so s stays an involution.
/// s is then averaged over its symmetry images, which leaves an involution up to the square of
/// the rounding asymmetry.
ops::ControlledOperator symmetric_flatten(const ops::ControlledOperator& h, const ops::GapCertificate& cert,
                                          const SymmetrySpec& spec);

struct SymmetryReport {
  std::optional<double> T_violation, C_violation, P_violation;
  std::vector<double> group_violations;
  double max_violation = 0.0;
  bool pass = false;
};

/// Violation = max entry of the symmetry-breaking part (H - S(H)) / 2.
SymmetryReport verify_symmetry(const ops::ControlledOperator& h, const SymmetrySpec& spec, double tol = 1e-10);
/// Same, measured in operator norm (dense; for bounds such as the flattening Lipschitz estimate).
SymmetryReport verify_symmetry_norm(const ops::ControlledOperator& h, const SymmetrySpec& spec,
                                    double tol = 1e-10);

}  // namespace roelab::sym
