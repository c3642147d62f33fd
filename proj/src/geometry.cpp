#include "roelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace roelab::geometry {

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
  return v;
}

bool Box::contains(const Coord& x, double tol) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  return true;
}

double Box::depth(const Coord& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) d = std::min({d, x[i] - lo[i], hi[i] - x[i]});
  return std::max(0.0, d);
}

PointSet::PointSet(int dim, Eigen::MatrixXd coords, Box window)
    : dim_(dim), coords_(std::move(coords)), window_(std::move(window)) {
  if (dim < 1 || dim > 3) throw UsageError("point set dimension must be 1, 2 or 3");
  if (coords_.rows() != dim || window_.lo.size() != dim || window_.hi.size() != dim)
    throw UsageError("point set coordinates and window must match the dimension");
  for (int i = 0; i < dim; ++i)
    if (!(window_.hi[i] > window_.lo[i])) throw UsageError("window must have positive extent");
  for (int j = 0; j < size(); ++j)
    if (!window_.contains(coords_.col(j), 1e-9))
      throw UsageError("point " + std::to_string(j) + " lies outside the declared window");
}

Box PointSet::bounding_box() const {
  if (size() == 0) return window_;
  return Box{coords_.rowwise().minCoeff(), coords_.rowwise().maxCoeff()};
}

double PointSet::density() const { return size() / window_.volume(); }

double PointSet::diameter() const {
  Box b = bounding_box();
  return (b.hi - b.lo).norm();
}

PointSet PointSet::subset(std::span<const int> ids) const {
  Eigen::MatrixXd c(dim_, static_cast<Eigen::Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) c.col(static_cast<Eigen::Index>(k)) = coords_.col(ids[k]);
  return PointSet(dim_, std::move(c), window_);
}

// ---------------------------------------------------------------------------

SpatialIndex::SpatialIndex(const PointSet& ps, double cell) : ps_(&ps), cell_(cell) {
  if (!(cell > 0)) throw UsageError("spatial index cell size must be positive");
  Box b = ps.bounding_box();
  origin_ = b.lo;
  extent_.resize(ps.dim());
  std::int64_t total = 1;
  for (int i = 0; i < ps.dim(); ++i) {
    extent_[i] = static_cast<int>(std::floor((b.hi[i] - b.lo[i]) / cell)) + 1;
    total *= extent_[i];
  }
  // Very fine cells on a sparse sample would waste memory; coarsen instead.
  while (total > 8 * std::max(ps.size(), 1) + 64) {
    cell_ *= 2;
    total = 1;
    for (int i = 0; i < ps.dim(); ++i) {
      extent_[i] = static_cast<int>(std::floor((b.hi[i] - b.lo[i]) / cell_)) + 1;
      total *= extent_[i];
    }
  }
  buckets_.assign(static_cast<std::size_t>(total), {});
  for (int j = 0; j < ps.size(); ++j) buckets_[key(cell_of(ps.coord(j)))].push_back(j);
}

Eigen::VectorXi SpatialIndex::cell_of(const Coord& x) const {
  Eigen::VectorXi c(x.size());
  for (int i = 0; i < x.size(); ++i) {
    double f = std::floor((x[i] - origin_[i]) / cell_);
    c[i] = static_cast<int>(std::clamp(f, 0.0, static_cast<double>(extent_[i] - 1)));
  }
  return c;
}

std::int64_t SpatialIndex::key(const Eigen::VectorXi& c) const {
  std::int64_t k = 0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) k = k * extent_[i] + c[i];
  return k;
}

std::vector<int> SpatialIndex::within(const Coord& x, double radius) const {
  std::vector<int> out;
  if (!(radius > 0) || ps_->size() == 0) return out;
  const int d = ps_->dim();
  Eigen::VectorXi lo = cell_of(x.array() - radius), hi = cell_of(x.array() + radius);
  Eigen::VectorXi c = lo;
  const double r2 = radius * radius;
  while (true) {
    for (int id : buckets_[key(c)])
      if ((ps_->coord(id) - x).squaredNorm() < r2) out.push_back(id);
    int i = 0;
    for (; i < d; ++i) {
      if (c[i] < hi[i]) {
        ++c[i];
        break;
      }
      c[i] = lo[i];
    }
    if (i == d) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<int, double> SpatialIndex::nearest(const Coord& x) const {
  if (ps_->size() == 0) throw UsageError("nearest-point query on an empty point set");
  double r = cell_;
  while (true) {
    auto ids = within(x, r);
    if (!ids.empty()) {
      int best = -1;
      double bd = std::numeric_limits<double>::infinity();
      for (int id : ids) {
        double dd = (ps_->coord(id) - x).norm();
        if (dd < bd) bd = dd, best = id;
      }
      return {best, bd};
    }
    r *= 2;
  }
}

// ---------------------------------------------------------------------------

namespace {

double min_spacing(const PointSet& ps, const SpatialIndex& idx, double guess) {
  double best = std::numeric_limits<double>::infinity();
  const double limit = ps.diameter() + 1.0;
  for (int j = 0; j < ps.size(); ++j) {
    double r = guess;
    while (true) {
      auto ids = idx.within(ps.coord(j), r);
      double bj = std::numeric_limits<double>::infinity();
      for (int id : ids)
        if (id != j) bj = std::min(bj, ps.distance(id, j));
      if (bj < r) {
        best = std::min(best, bj);
        break;
      }
      if (r > limit) break;
      r *= 2;
    }
  }
  return best;
}

double typical_spacing(const PointSet& ps) {
  Box b = ps.bounding_box();
  double vol = 1.0;
  for (int i = 0; i < ps.dim(); ++i) vol *= std::max(b.hi[i] - b.lo[i], 1e-9);
  return std::max(std::pow(vol / std::max(ps.size(), 1), 1.0 / ps.dim()), 1e-6);
}

}  // namespace

DeloneCertificate certify_delone(const PointSet& ps) {
  if (ps.size() == 0) throw UsageError("certify_delone needs a nonempty point set");
  DeloneCertificate cert;
  if (ps.size() == 1) {
    cert.single_point = true;
    cert.valid = true;
    cert.packing_radius = std::numeric_limits<double>::infinity();
    return cert;
  }
  SpatialIndex idx(ps, typical_spacing(ps));
  double dmin = min_spacing(ps, idx, typical_spacing(ps));
  cert.packing_radius = 0.5 * dmin;
  cert.valid = dmin > 0;
  if (!cert.valid) return cert;

  // Grid anchored at the window corner, pitch r/4 (coarsened for very large grids).
  const Box& w = ps.window();
  const int d = ps.dim();
  double pitch = cert.packing_radius / 4;
  auto count = [&](double p) {
    double n = 1;
    for (int i = 0; i < d; ++i) n *= std::floor((w.hi[i] - w.lo[i]) / p) + 1;
    return n;
  };
  while (count(pitch) > 2e6) pitch *= 1.5;
  Eigen::VectorXi n(d);
  for (int i = 0; i < d; ++i) n[i] = static_cast<int>(std::floor((w.hi[i] - w.lo[i]) / pitch)) + 1;

  std::vector<double> depth, nearest;
  Eigen::VectorXi c = Eigen::VectorXi::Zero(d);
  Coord x(d);
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = w.lo[i] + c[i] * pitch;
    depth.push_back(w.depth(x));
    nearest.push_back(idx.nearest(x).second);
    int i = 0;
    for (; i < d; ++i) {
      if (++c[i] < n[i]) break;
      c[i] = 0;
    }
    if (i == d) break;
  }

  // Points of the window closer than R to its boundary may legitimately see no set
  // point within R; erode by the current estimate until it is self-consistent.
  double R = 0;
  for (int it = 0; it < 50; ++it) {
    double next = -1;
    for (std::size_t k = 0; k < depth.size(); ++k)
      if (depth[k] >= R - 1e-12) next = std::max(next, nearest[k]);
    if (next < 0) break;
    if (std::abs(next - R) < 1e-12) break;
    R = next;
  }
  cert.covering_radius = R;
  return cert;
}

std::vector<int> penumbra(const PointSet& ps, std::span<const int> subset, double radius) {
  if (radius < 0) throw UsageError("penumbra radius must be nonnegative");
  std::vector<char> mark(static_cast<std::size_t>(ps.size()), 0);
  if (subset.empty() || radius == 0) return {};
  SpatialIndex idx(ps, std::max(radius, typical_spacing(ps)));
  for (int y : subset)
    for (int id : idx.within(ps.coord(y), radius)) mark[id] = 1;
  std::vector<int> out;
  for (int j = 0; j < ps.size(); ++j)
    if (mark[j]) out.push_back(j);
  return out;
}

Partition partition_halfspace(const PointSet& ps, const Eigen::VectorXd& normal, double offset,
                              std::optional<double> thickness) {
  if (normal.size() != ps.dim()) throw UsageError("cut normal has the wrong dimension");
  double nn = normal.norm();
  if (!(nn > 0)) throw UsageError("cut normal must be nonzero");
  Partition p;
  p.cut.normal = normal / nn;
  p.cut.offset = offset / nn;
  if (thickness) {
    if (!(*thickness > 0)) throw UsageError("interface thickness must be positive");
    p.thickness = *thickness;
  } else {
    auto cert = certify_delone(ps);
    if (!cert.valid || cert.single_point)
      throw UsageError("default interface thickness needs a Delone sample with two or more points");
    p.thickness = 2 * (2 * cert.packing_radius);
  }
  for (int j = 0; j < ps.size(); ++j) {
    double s = p.cut.signed_distance(ps.coord(j));
    if (s >= 0) {
      p.plus_ids.push_back(j);
      if (s < p.thickness) p.interface_ids.push_back(j);
    } else {
      p.minus_ids.push_back(j);
    }
  }
  if (p.interface_ids.empty())
    throw UsageError("partition has an empty interface: the cut misses the sampled window");
  return p;
}

// ---------------------------------------------------------------------------

GroupAction make_group_action(const PointSet& ps, std::vector<Isometry> elements,
                              std::vector<Eigen::MatrixXcd> onsite_blocks, double tol) {
  if (elements.size() != onsite_blocks.size())
    throw UsageError("group action needs one on-site block per element");
  GroupAction g;
  g.elements = std::move(elements);
  g.onsite_blocks = std::move(onsite_blocks);
  SpatialIndex idx(ps, typical_spacing(ps));
  for (const auto& e : g.elements) {
    if (e.linear.rows() != ps.dim() || e.linear.cols() != ps.dim() || e.translation.size() != ps.dim())
      throw UsageError("isometry dimension mismatch");
    if (!(e.linear.transpose() * e.linear).isIdentity(1e-9))
      throw UsageError("group element is not an isometry");
    std::vector<int> perm(static_cast<std::size_t>(ps.size()), -1);
    for (int j = 0; j < ps.size(); ++j) {
      auto [id, dist] = idx.nearest(e.apply(ps.coord(j)));
      if (dist <= tol) perm[j] = id;
    }
    g.site_permutation.push_back(std::move(perm));
  }
  return g;
}

GroupAction cyclic_rotation_group(const PointSet& ps, int k, const Coord& center,
                                  const Eigen::MatrixXcd& generator_block) {
  if (ps.dim() != 2) throw UsageError("cyclic rotation groups are implemented for d = 2");
  if (k < 1) throw UsageError("rotation order must be positive");
  std::vector<Isometry> el;
  std::vector<Eigen::MatrixXcd> blocks;
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(generator_block.rows(), generator_block.cols());
  for (int p = 0; p < k; ++p) {
    double a = 2 * std::numbers::pi * p / k;
    Eigen::Matrix2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    el.push_back({r, center - r * center});
    blocks.push_back(b);
    b = generator_block * b;
  }
  return make_group_action(ps, std::move(el), std::move(blocks));
}

}  // namespace roelab::geometry
