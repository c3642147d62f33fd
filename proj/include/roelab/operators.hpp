#pragma once

#include "roelab/geometry.hpp"
#include "roelab/spectral.hpp"

#include <Eigen/Sparse>

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace roelab::ops {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Entries with modulus at or below this are treated as structural zeros.
inline constexpr double kZero = 1e-14;

/// Uniformly finite module: `orbitals` internal states per site, graded by `grading`.
struct SiteModule {
  geometry::PointSetPtr points;
  int orbitals = 1;
  Eigen::VectorXi grading;               ///< +-1 per orbital
  std::optional<Eigen::VectorXi> spin;   ///< optional spin-z label +-1 per orbital
  bool periodic = false;                 ///< operators may wrap around the sample (oracle use only)
  /// ids of these sites in the module this one was restricted from (empty for a root module)
  std::vector<int> parent_ids;

  int sites() const { return points->size(); }
  int dimension() const { return sites() * orbitals; }
  int index(int site, int orbital) const { return site * orbitals + orbital; }
  int site_of(int index) const { return index / orbitals; }
};

using ModulePtr = std::shared_ptr<const SiteModule>;

ModulePtr make_module(geometry::PointSetPtr points, int orbitals,
                      std::optional<Eigen::VectorXi> grading = std::nullopt,
                      std::optional<Eigen::VectorXi> spin = std::nullopt);

/// Module on a subset of sites; orbital structure is copied and parent ids recorded.
ModulePtr restrict_module(const ModulePtr& module, const std::vector<int>& site_ids);

/// Block-sparse operator on a site module with a declared propagation bound.
class ControlledOperator {
 public:
  /// Validates the propagation bound on every stored entry and, when `hermitian` is set,
  /// that the matrix equals its adjoint to 1e-12 (relative to the largest entry).
  ControlledOperator(ModulePtr module, SparseMatrix matrix, double declared_propagation,
                     bool hermitian);

  /// Dense input; entries with |z| <= kZero are dropped. Without an explicit bound the
  /// propagation is measured from the data.
  static ControlledOperator from_dense(ModulePtr module, const Eigen::MatrixXcd& m,
                                       std::optional<double> declared_propagation, bool hermitian);
  static ControlledOperator identity(ModulePtr module);
  static ControlledOperator grading(ModulePtr module);
  static ControlledOperator zero(ModulePtr module);

  const SiteModule& module() const { return *module_; }
  const ModulePtr& module_ptr() const { return module_; }
  const SparseMatrix& matrix() const { return matrix_; }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }
  double declared_propagation() const { return declared_; }
  bool hermitian() const { return hermitian_; }
  int dimension() const { return static_cast<int>(matrix_.rows()); }

  Eigen::MatrixXcd block(int x, int y) const;
  ControlledOperator adjoint() const;
  ControlledOperator scaled(cplx factor) const;
  /// Same matrix, new declared bound (must still hold).
  ControlledOperator with_propagation(double bound) const;

 private:
  ModulePtr module_;
  SparseMatrix matrix_;
  double declared_;
  bool hermitian_;
};

ControlledOperator operator+(const ControlledOperator& a, const ControlledOperator& b);
ControlledOperator operator-(const ControlledOperator& a, const ControlledOperator& b);
ControlledOperator operator*(const ControlledOperator& a, const ControlledOperator& b);

/// Collects m x m blocks and assembles a ControlledOperator.
class BlockBuilder {
 public:
  explicit BlockBuilder(ModulePtr module);
  void add(int x, int y, const Eigen::MatrixXcd& block);
  /// Adds block at (x, y) and its adjoint at (y, x); for x == y adds the Hermitian part twice.
  void add_hermitian(int x, int y, const Eigen::MatrixXcd& block);
  ControlledOperator build(bool hermitian, std::optional<double> declared_propagation = std::nullopt) const;

 private:
  ModulePtr module_;
  std::vector<Eigen::Triplet<cplx>> entries_;
};

/// max over nonzero entries of the distance between their sites.
double propagation(const ControlledOperator& a);

/// (H_R)_{xy} = H_{xy} if d(x, y) < R, else 0.
ControlledOperator truncate(const ControlledOperator& h, double radius);

/// Block (x, y) -> i (x_j - y_j) block(x, y).
ControlledOperator derivation(const ControlledOperator& a, int axis);
/// Derivation along an arbitrary direction: i <dir, x - y> block(x, y).
ControlledOperator derivation(const ControlledOperator& a, const Eigen::VectorXd& direction);

/// chi H chi on the same module, chi the indicator of `site_ids`.
ControlledOperator compress(const ControlledOperator& h, const std::vector<int>& site_ids);
/// chi H chi as an operator on the restricted module.
ControlledOperator restrict_to(const ControlledOperator& h, const std::vector<int>& site_ids);
ControlledOperator restrict_to(const ControlledOperator& h, const ModulePtr& sub);

double operator_norm(const ControlledOperator& a);
double max_entry(const SparseMatrix& a);

struct GapOptions {
  double fermi = 0.0;
  /// Drop eigenvectors with more than half their weight near the open boundary.
  bool boundary_margin = true;
  /// Width of the boundary layer; defaults to twice the operator's propagation, capped so that the
  /// layer holds at most a third of the sites.
  std::optional<double> margin_width;
  double tolerance = 1e-8;
};

struct GapCertificate {
  double epsilon = 0.0;
  double lower_spectrum_max = 0.0;
  double upper_spectrum_min = 0.0;
  double fermi = 0.0;
  std::string method = "full diagonalization";
  bool valid = false;
  int excluded_states = 0;
  /// Cached eigendecomposition of the certified operator (reused by flatten).
  std::shared_ptr<const spectral::Eigensystem> eigensystem;
  std::size_t fingerprint = 0;
};

GapCertificate certify_gap(const ControlledOperator& h, const GapOptions& options = {});

/// sgn(H - fermi); declared propagation is the sample diameter.
ControlledOperator flatten(const ControlledOperator& h, const GapCertificate& cert);

struct DecayFit {
  double prefactor = 0.0;        ///< C in |A_xy| <= C exp(-d/xi)
  double length = 0.0;           ///< xi (infinite when no decay is visible)
  std::vector<double> distances; ///< binned distances
  std::vector<double> envelope;  ///< max block norm per bin
};

/// Fits log(max block norm at distance d) by least squares over bins of unit width.
DecayFit fit_decay(const ControlledOperator& a, double min_distance = 1.0);

std::size_t fingerprint(const ControlledOperator& a);

}  // namespace roelab::ops
