#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace roelab {

/// Bad input or violated precondition (maps to CLI exit code 2).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A computation that could not certify its own result (exit code 1).
struct ComputationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace roelab

namespace roelab::geometry {

using Coord = Eigen::VectorXd;

/// Axis-aligned box [lo, hi] per axis.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  Coord center() const { return 0.5 * (lo + hi); }
  bool contains(const Coord& x, double tol = 1e-12) const;
  /// Euclidean distance from x to the complement of the box (0 on or outside the boundary).
  double depth(const Coord& x) const;
};

/// Finite windowed sample of a Delone subset of R^d. Point ids are dense in [0, N).
class PointSet {
 public:
  PointSet(int dim, Eigen::MatrixXd coords, Box window);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(coords_.cols()); }
  Eigen::MatrixXd::ConstColXpr coord(int id) const { return coords_.col(id); }
  const Eigen::MatrixXd& coords() const { return coords_; }
  const Box& window() const { return window_; }

  /// Smallest box containing the points (the physical extent of the sample).
  Box bounding_box() const;
  /// Points per unit volume of the window.
  double density() const;
  double diameter() const;
  double distance(int a, int b) const { return (coords_.col(a) - coords_.col(b)).norm(); }

  /// Sub-sample with ids renumbered 0..k-1 in the order given; the window is kept.
  PointSet subset(std::span<const int> ids) const;

 private:
  int dim_;
  Eigen::MatrixXd coords_;
  Box window_;
};

using PointSetPtr = std::shared_ptr<const PointSet>;

/// Uniform cell list for radius and nearest-point queries.
class SpatialIndex {
 public:
  SpatialIndex(const PointSet& ps, double cell);

  /// Ids with distance < radius from x (strict), in increasing id order.
  std::vector<int> within(const Coord& x, double radius) const;
  /// Nearest point id and its distance.
  std::pair<int, double> nearest(const Coord& x) const;

 private:
  std::int64_t key(const Eigen::VectorXi& c) const;
  Eigen::VectorXi cell_of(const Coord& x) const;

  const PointSet* ps_;
  double cell_;
  Eigen::VectorXd origin_;
  Eigen::VectorXi extent_;
  std::vector<std::vector<int>> buckets_;
};

// ---------------------------------------------------------------------------
// Generators

/// Z^d (spacing a) with `extent[i]` points per axis; window [0, a*extent)^d.
struct LatticeSpec {
  int dim = 2;
  std::vector<int> extent;
  double spacing = 1.0;
};

/// Honeycomb lattice with sublattice B shifted onto the A site of its cell, so the
/// sample is the Bravais lattice in cell coordinates (i, j) and every site carries
/// both sublattice orbitals.
struct HoneycombShiftSpec {
  int nx = 1;
  int ny = 1;
};

/// Z^d with each coordinate displaced by uniform[-jitter, jitter]; window
/// [-1/2, extent - 1/2)^d.
struct PerturbedLatticeSpec {
  int dim = 2;
  std::vector<int> extent;
  double jitter = 0.0;
  std::uint64_t seed = 0;
};

/// Fibonacci chain by cut-and-project from Z^2; tiles of length tau and 1, window [0, length).
struct FibonacciSpec {
  double length = 10.0;
};

/// Ammann-Beenker tiling vertices by cut-and-project from Z^4 with the octagonal
/// acceptance window; window [0, size)^2, unit edge length.
struct AmmannBeenkerSpec {
  double size = 5.0;
};

struct ExplicitSpec {
  int dim = 1;
  std::vector<Coord> points;
  std::optional<Box> window;
};

using GeneratorSpec = std::variant<LatticeSpec, HoneycombShiftSpec, PerturbedLatticeSpec,
                                   FibonacciSpec, AmmannBeenkerSpec, ExplicitSpec>;

PointSet generate(const GeneratorSpec& spec);

// ---------------------------------------------------------------------------
// Delone certification, penumbra, partitions

struct DeloneCertificate {
  double packing_radius = 0.0;                 ///< r: half the minimum pairwise distance
  std::optional<double> covering_radius;       ///< R: empty for a single point
  bool valid = false;
  bool single_point = false;
};

DeloneCertificate certify_delone(const PointSet& ps);

/// Pen(Y, R) = { x : d(x, Y) < R }, sorted ids.
std::vector<int> penumbra(const PointSet& ps, std::span<const int> subset, double radius);

struct HalfSpace {
  Eigen::VectorXd normal;  ///< unit vector
  double offset = 0.0;     ///< plus side is <normal, x> >= offset
  double signed_distance(const Coord& x) const { return normal.dot(x) - offset; }
};

struct Partition {
  HalfSpace cut;
  double thickness = 0.0;
  std::vector<int> plus_ids;
  std::vector<int> minus_ids;
  std::vector<int> interface_ids;  ///< plus points with signed distance < thickness
};

/// Split by sign of <normal, x> - offset (normal need not be unit; the cut is rescaled).
/// Default thickness is twice the packing diameter.
Partition partition_halfspace(const PointSet& ps, const Eigen::VectorXd& normal, double offset,
                              std::optional<double> thickness = std::nullopt);

// ---------------------------------------------------------------------------
// Point-group actions

struct Isometry {
  Eigen::MatrixXd linear;
  Eigen::VectorXd translation;
  Coord apply(const Coord& x) const { return linear * x + translation; }
};

/// Finite group acting by isometries; element 0 is the identity.
struct GroupAction {
  std::vector<Isometry> elements;
  /// site_permutation[g][x] = id of g.x, or -1 when g.x falls outside the sample.
  std::vector<std::vector<int>> site_permutation;
  /// Unitary on the orbital space attached to each element.
  std::vector<Eigen::MatrixXcd> onsite_blocks;
};

GroupAction make_group_action(const PointSet& ps, std::vector<Isometry> elements,
                              std::vector<Eigen::MatrixXcd> onsite_blocks, double tol = 1e-9);

/// C_k rotations about `center` (d = 2); block of g^p is generator_block^p.
GroupAction cyclic_rotation_group(const PointSet& ps, int k, const Coord& center,
                                  const Eigen::MatrixXcd& generator_block);

}  // namespace roelab::geometry
