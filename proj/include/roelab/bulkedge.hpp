#pragma once

#include "roelab/indices.hpp"
#include "roelab/models.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace roelab {

/// Gapped controlled Hamiltonian with its symmetry data. `recipe` is kept when the system was
/// built from a library model (needed by formulas that rebuild ring closures).
struct BulkSystem {
  ops::ControlledOperator H;
  sym::SymmetrySpec spec;
  ops::GapCertificate gap;
  double fermi = 0.0;
  std::optional<models::ModelConfig> recipe;

  const ops::SiteModule& module() const { return H.module(); }
  geometry::PointSetPtr points() const { return H.module().points; }
};

/// Validates the spec against the module, checks the symmetries (max entry below `symmetry_tol`)
/// and certifies the gap; throws UsageError / ComputationError otherwise.
BulkSystem make_bulk(ops::ControlledOperator h, sym::SymmetrySpec spec, double fermi = 0.0,
                     std::optional<models::ModelConfig> recipe = std::nullopt, double symmetry_tol = 1e-8);
BulkSystem make_bulk(const models::Model& model, double fermi = 0.0);

/// Compression of a bulk system to the plus side of a partition.
struct EdgeSystem {
  ops::ModulePtr module;            ///< module on Y+ (parent ids recorded)
  ops::ControlledOperator H_hat;
  sym::SymmetrySpec spec;           ///< on-site blocks only; point-group data is dropped by the cut
  ops::GapCertificate parent_gap;
  geometry::Partition partition;
  idx::EdgeGeometry geometry;
  int in_gap_states = 0;
  /// largest weight away from interface and sample faces of a state with |E - fermi| < epsilon / 2
  double max_away_weight = 0.0;
};

/// Compresses H to Y+ and checks that no eigenstate of H^ in the middle half of the gap lives away
/// from the interface penumbra and the faces of the sample (ComputationError otherwise). Edge states
/// close to the band edges penetrate deeper and are not checked.
EdgeSystem make_edge(const BulkSystem& bulk, const geometry::Partition& part,
                     std::optional<double> depth = std::nullopt);

/// Boundary map realized on operators: s^ = chi s chi on Y+ and U^ = -exp(pi i s^).
/// Deviation and profile are measured on rows at distance >= face_margin from the faces of the
/// sample, where s is local; near the other faces s carries the sample's own edge states.
struct BoundaryMap {
  ops::ModulePtr module;
  Eigen::MatrixXcd s_hat;
  Eigen::MatrixXcd u_hat;
  double unitarity_defect = 0.0;        ///< max entry of U^* U - 1
  /// max entry of U^ - 1 in rows at distance >= deep_distance (NaN when no row qualifies)
  double off_interface_deviation = 0.0;
  double deep_distance = 0.0;
  double face_margin = 0.0;
  /// max entry of U^ - 1 per unit-width bin of distance from the interface, with a log-linear fit.
  std::vector<double> profile_distance, profile_value;
  double decay_length = 0.0, decay_prefactor = 0.0;
};

struct BoundaryOptions {
  std::optional<double> deep_distance;  ///< default: half the largest distance from the cut inside Y+
  std::optional<double> face_margin;    ///< default: a quarter of the smallest sample extent
};

BoundaryMap mv_boundary(const ops::ControlledOperator& s, const geometry::Partition& part,
                        const BoundaryOptions& options = {});

struct BecConfig {
  std::vector<double> windows;        ///< bulk windows (defaults when empty)
  std::vector<double> edge_windows;   ///< edge windows (defaults when empty)
  std::optional<double> depth;        ///< edge strip depth
  std::optional<std::pair<double, double>> delta;  ///< edge conductance window, default middle third of the gap
  bool smooth_window = true;
  idx::SnapTolerance tol;
  bool boundary_pairing = true;       ///< also pair the boundary-map unitary (d = 2)
  /// Disorder sweep: seeds and strength as a fraction of the clean gap epsilon.
  std::vector<std::uint64_t> disorder_seeds;
  double disorder_fraction = 0.5;
  std::vector<double> truncation_radii;
  int jobs = 1;
};

struct SweepEntry {
  std::string kind;                   ///< "disorder" or "truncation"
  double parameter = 0.0;             ///< W or R
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::optional<idx::IndexReport> bulk, edge;
  bool pass = false;
  std::string error;
};

struct BecReport {
  std::string label;
  int dim = 0;
  double epsilon = 0.0;
  idx::IndexReport bulk;
  idx::IndexReport edge;
  /// d = 2 only: edge conductance over the narrower window and the boundary-map pairing.
  std::optional<idx::IndexReport> plateau, boundary_pairing;
  std::vector<SweepEntry> sweeps;
  bool pass = false;
  std::vector<std::string> notes;
};

/// Supported (class, d): A 2, AIII 1, AIII 3, AII 2 (spin-conserving), D 1.
std::vector<std::string> supported_pairs();

BecReport verify_bec(const BulkSystem& bulk, const geometry::Partition& part, const BecConfig& config = {});

/// Number of workers: ROELAB_JOBS when set and positive, else 1.
int default_jobs();

}  // namespace roelab
