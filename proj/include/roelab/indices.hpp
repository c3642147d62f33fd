#pragma once

#include "roelab/models.hpp"
#include "roelab/operators.hpp"
#include "roelab/symmetry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace roelab::idx {

/// Windowed trace per unit volume: value_n = |Lambda_n|^-1 sum_{x in Lambda_n} Tr A_xx with
/// Lambda_n the sites in the half-open box [c - n, c + n)^d, c the sample centre.
struct TraceEstimate {
  std::vector<double> windows;
  std::vector<std::complex<double>> values;
  std::vector<int> counts;       ///< sites per window
  std::vector<double> volumes;   ///< Euclidean volume (2n)^d of each window
  std::complex<double> extrapolated = 0.0;
  double error = 0.0;            ///< |last - second to last|
};

/// Sites in [c - n, c + n)^d.
std::vector<int> window_sites(const geometry::PointSet& ps, const Eigen::VectorXd& center, double n);
Eigen::VectorXd sample_center(const geometry::PointSet& ps);
/// n = round(h * {0.55, 0.7, 0.85}) with h the smallest half extent of the sample.
std::vector<double> default_windows(const geometry::PointSet& ps);

TraceEstimate trace_per_unit_volume(const ops::ControlledOperator& a, const std::vector<double>& windows);
/// Same estimator on a dense matrix over the module (no propagation margin is enforced).
TraceEstimate trace_per_unit_volume(const ops::SiteModule& module, const Eigen::MatrixXcd& a,
                                    const std::vector<double>& windows);

struct IndexReport {
  double raw = 0.0;
  double imag = 0.0;              ///< discarded imaginary part of the raw pairing
  bool is_z2 = false;
  bool snapped_ok = false;
  int snapped = 0;                ///< integer, or Z2 class in {0, 1}
  std::string group;
  double error = 0.0;
  std::string formula;
  std::vector<double> windows;
  std::vector<double> window_values;
  std::vector<std::string> warnings;

  std::string snapped_text() const;   ///< "3", "Z2:1", or "unsnapped"
};

struct SnapTolerance {
  double integer = 0.1;
  double z2 = 0.25;
};

/// Fill snapped/snapped_ok from raw.
void snap(IndexReport& r, const SnapTolerance& tol = {});

/// 2 pi i T(P [nabla_2 P, nabla_1 P]) per unit area (d = 2); equals the lattice Chern number of the
/// occupied bands in momentum space.
IndexReport chern_even(const ops::ControlledOperator& projection, const std::vector<double>& windows,
                       const SnapTolerance& tol = {});
/// Projection onto the negative spectral subspace of a flattened symmetry, P = (1 - s) / 2.
ops::ControlledOperator negative_projection(const ops::ControlledOperator& s);

/// Odd pairing (d = 1 or 3) of the chiral block U = s_{-+} of a flattened chiral symmetry:
/// i (i pi)^{(d-1)/2} / d!! sum_sigma sgn(sigma) T(U^* nabla_s1 U ... U^* nabla_sd U).
IndexReport chern_odd(const ops::ControlledOperator& flat, const sym::SymmetrySpec& spec,
                      const std::vector<double>& windows, const SnapTolerance& tol = {});

/// Split a chirally graded operator into its (-,+) block: rows of minus orbitals, columns of plus
/// orbitals, both ordered by site. P must be diagonal with entries +-1.
Eigen::MatrixXcd chiral_block(const ops::ControlledOperator& a, const sym::SymmetrySpec& spec);

/// Restriction to the orbitals with the given spin label (spin-conserving operators only).
ops::ControlledOperator spin_sector(const ops::ControlledOperator& h, int spin, double tol = 1e-10);

/// Spin Chern number mod 2 of a spin-conserving T^2 = -1 Hamiltonian.
IndexReport kane_mele(const ops::ControlledOperator& h, const sym::SymmetrySpec& spec,
                      const std::vector<double>& windows, double fermi = 0.0, const SnapTolerance& tol = {});

/// Majorana number of a class D chain from its periodic and antiperiodic ring closures:
/// raw = (1 - sgn Pf A_p * sgn Pf A_ap) / 2.
IndexReport majorana_number(const models::ModelConfig& config, geometry::PointSetPtr points);
/// Sign of the Pfaffian of a real skew-symmetric matrix.
int pfaffian_sign(Eigen::MatrixXd a);

// ---------------------------------------------------------------------------
// Edge formulas

/// Where and how the edge trace averages: sites of Y+ with signed distance below `depth` and
/// tangential coordinates in [-n, n) around `anchor`, normalized per unit length (area for d = 3) of the edge.
struct EdgeGeometry {
  geometry::HalfSpace cut;
  double depth = 0.0;
  Eigen::VectorXd anchor;
  /// d x (d - 1) orthonormal columns spanning the cut: (n_y, -n_x) for d = 2; for d = 3 the
  /// columns t1, t2 satisfy t1 x t2 = -normal.
  Eigen::MatrixXd tangent;
};

EdgeGeometry edge_geometry(const geometry::PointSet& plus_sites, const geometry::Partition& part,
                           std::optional<double> depth = std::nullopt);
std::vector<int> edge_strip(const geometry::PointSet& plus_sites, const EdgeGeometry& g, double n);
std::vector<double> default_edge_windows(const geometry::PointSet& plus_sites, const EdgeGeometry& g);

struct EdgeConductanceOptions {
  bool smooth_window = true;   ///< smooth bump of mean one on Delta instead of the sharp projection
  std::vector<double> windows; ///< tangential half-lengths n; defaults when empty
};

/// -(2 pi / |Delta|) T^(g_Delta(H^) nabla_t H^) on the compressed Hamiltonian.
IndexReport edge_conductance(const ops::ControlledOperator& h_hat, const EdgeGeometry& g,
                             std::pair<double, double> delta, std::pair<double, double> bulk_gap,
                             const EdgeConductanceOptions& options = {}, const SnapTolerance& tol = {});

/// i T^(U^* nabla_t U) for a unitary on Y+ that differs from 1 near the interface.
IndexReport edge_winding(const ops::SiteModule& plus_module, const Eigen::MatrixXcd& u, const EdgeGeometry& g,
                         const std::vector<double>& windows, const SnapTolerance& tol = {});

struct FredholmOptions {
  double threshold = 1e-6;
  double separation = 10.0;
};

/// Half-line index of the chiral block: weight of kernel vectors of H^_0 near the interface
/// minus that of H^_0^*.
IndexReport edge_fredholm(const ops::ControlledOperator& h_hat, const sym::SymmetrySpec& spec,
                          const EdgeGeometry& g, const FredholmOptions& options = {});

/// Parity of the near-zero modes of a class D half-line Hamiltonian weighted at the interface.
IndexReport edge_majorana(const ops::ControlledOperator& h_hat, const EdgeGeometry& g,
                          const FredholmOptions& options = {});

/// Surface pairing for d = 3 chiral systems: Chern pairing over the cut plane of the
/// dilation projection of the compressed chiral block.
IndexReport edge_chiral_3d(const ops::ControlledOperator& flat_hat, const sym::SymmetrySpec& spec,
                           const EdgeGeometry& g, const std::vector<double>& windows,
                           const SnapTolerance& tol = {});

}  // namespace roelab::idx
