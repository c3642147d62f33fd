#include "roelab/bulkedge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numbers>

namespace roelab {

using ops::cplx;

int default_jobs() {
  if (const char* v = std::getenv("ROELAB_JOBS")) {
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 256L));
  }
  return 1;
}

BulkSystem make_bulk(ops::ControlledOperator h, sym::SymmetrySpec spec, double fermi,
                     std::optional<models::ModelConfig> recipe, double symmetry_tol) {
  spec.validate();
  int orb = spec.orbitals();
  if (orb != 0 && orb != h.module().orbitals) throw UsageError("symmetry blocks do not match the orbital dimension");
  if (!h.hermitian()) throw UsageError("bulk Hamiltonian must be self-adjoint");
  auto rep = sym::verify_symmetry(h, spec, symmetry_tol);
  if (!rep.pass)
    throw UsageError("Hamiltonian violates its declared symmetries by " + std::to_string(rep.max_violation));
  auto gap = ops::certify_gap(h, {.fermi = fermi});
  if (!gap.valid) throw ComputationError("no spectral gap certified at the Fermi level");
  return BulkSystem{std::move(h), std::move(spec), std::move(gap), fermi, std::move(recipe)};
}

BulkSystem make_bulk(const models::Model& model, double fermi) {
  return make_bulk(model.H, model.spec, fermi, model.config);
}

namespace {

/// Distance to the faces of a box, ignoring flat axes.
double face_depth(const geometry::Box& bb, const Eigen::VectorXd& x) {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < bb.dim(); ++a)
    if (bb.hi[a] - bb.lo[a] > 1e-9) d = std::min({d, x[a] - bb.lo[a], bb.hi[a] - x[a]});
  return d;
}

}  // namespace

EdgeSystem make_edge(const BulkSystem& bulk, const geometry::Partition& part, std::optional<double> depth) {
  const auto& ps = *bulk.points();
  if (part.plus_ids.empty() || part.interface_ids.empty()) throw UsageError("partition has an empty interface");
  for (int id : part.plus_ids)
    if (id < 0 || id >= ps.size()) throw UsageError("partition does not match the bulk point set");
  EdgeSystem e{.module = ops::restrict_module(bulk.H.module_ptr(), part.plus_ids),
               .H_hat = ops::ControlledOperator::zero(bulk.H.module_ptr()),
               .spec = bulk.spec,
               .parent_gap = bulk.gap,
               .partition = part};
  e.spec.group.reset();
  e.H_hat = ops::restrict_to(bulk.H, e.module);
  e.geometry = idx::edge_geometry(*e.module->points, part, depth);

  const auto& plus = *e.module->points;
  const double prop = ops::propagation(bulk.H);
  const geometry::Box bb = ps.bounding_box();
  std::vector<char> away(static_cast<std::size_t>(plus.size()));
  for (int x = 0; x < plus.size(); ++x) {
    auto p = plus.coord(x);
    away[static_cast<std::size_t>(x)] =
        part.cut.signed_distance(p) >= part.thickness + 2 * prop && face_depth(bb, p) >= 2 * prop;
  }
  auto es = spectral::eigh(e.H_hat.dense());
  const double eps = bulk.gap.epsilon;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    if (std::abs(es.values[k] - bulk.fermi) >= eps - 1e-9 * std::max(1.0, eps)) continue;
    ++e.in_gap_states;
    if (std::abs(es.values[k] - bulk.fermi) >= 0.5 * eps) continue;
    double w = 0;
    for (Eigen::Index i = 0; i < es.vectors.rows(); ++i)
      if (away[static_cast<std::size_t>(e.module->site_of(static_cast<int>(i)))]) w += std::norm(es.vectors(i, k));
    e.max_away_weight = std::max(e.max_away_weight, w);
  }
  if (e.max_away_weight > 0.5)
    throw ComputationError("edge system has an in-gap state away from the interface (weight " +
                           std::to_string(e.max_away_weight) +
                           "); increase the interface thickness or use a larger sample");
  return e;
}

BoundaryMap mv_boundary(const ops::ControlledOperator& s, const geometry::Partition& part,
                        const BoundaryOptions& options) {
  Eigen::MatrixXcd sd = s.dense();
  const Eigen::Index n = sd.rows();
  if (!s.hermitian() || (sd * sd - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8)
    throw UsageError("boundary map needs a self-adjoint unitary (flattened symmetry)");
  if (part.plus_ids.empty()) throw UsageError("partition has an empty plus side");
  BoundaryMap b;
  b.module = ops::restrict_module(s.module_ptr(), part.plus_ids);
  auto sh = ops::restrict_to(s, b.module);
  b.s_hat = sh.dense();
  auto es = spectral::eigh(b.s_hat);
  b.u_hat = -spectral::apply_function(es, [](double x) { return std::exp(cplx(0.0, std::numbers::pi * x)); });
  const Eigen::Index m = b.u_hat.rows();
  b.unitarity_defect = (b.u_hat.adjoint() * b.u_hat - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();

  const auto& plus = *b.module->points;
  std::vector<double> dist(static_cast<std::size_t>(plus.size()));
  double dmax = 0;
  for (int x = 0; x < plus.size(); ++x) {
    dist[static_cast<std::size_t>(x)] = part.cut.signed_distance(plus.coord(x));
    dmax = std::max(dmax, dist[static_cast<std::size_t>(x)]);
  }
  b.deep_distance = options.deep_distance.value_or(0.5 * dmax);
  const geometry::Box bb = s.module().points->bounding_box();
  double extent = std::numeric_limits<double>::infinity();
  for (int a = 0; a < bb.dim(); ++a)
    if (bb.hi[a] - bb.lo[a] > 1e-9) extent = std::min(extent, bb.hi[a] - bb.lo[a]);
  b.face_margin = options.face_margin.value_or(std::isfinite(extent) ? 0.25 * extent : 0.0);
  Eigen::MatrixXcd dev = b.u_hat - Eigen::MatrixXcd::Identity(m, m);
  const int bins = static_cast<int>(std::floor(dmax)) + 1;
  std::vector<double> prof(static_cast<std::size_t>(bins), 0.0);
  int deep_rows = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    int x = b.module->site_of(static_cast<int>(i));
    if (face_depth(bb, plus.coord(x)) < b.face_margin) continue;
    double d = dist[static_cast<std::size_t>(x)];
    double row = dev.row(i).cwiseAbs().maxCoeff();
    auto& slot = prof[static_cast<std::size_t>(std::clamp(static_cast<int>(std::floor(d)), 0, bins - 1))];
    slot = std::max(slot, row);
    if (d >= b.deep_distance) b.off_interface_deviation = std::max(b.off_interface_deviation, row), ++deep_rows;
  }
  if (deep_rows == 0) b.off_interface_deviation = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> xs, ys;
  for (int k = 0; k < bins; ++k) {
    b.profile_distance.push_back(k);
    b.profile_value.push_back(prof[static_cast<std::size_t>(k)]);
    if (prof[static_cast<std::size_t>(k)] > 1e-13) xs.push_back(k), ys.push_back(std::log(prof[static_cast<std::size_t>(k)]));
  }
  b.decay_length = std::numeric_limits<double>::infinity();
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
    double slope = sxx > 0 ? sxy / sxx : 0.0;
    if (slope < 0) b.decay_length = -1.0 / slope;
    b.decay_prefactor = std::exp(my - slope * mx);
  } else if (!ys.empty()) {
    b.decay_prefactor = std::exp(ys.front());
  }
  return b;
}

std::vector<std::string> supported_pairs() { return {"A d=2", "AIII d=1", "AIII d=3", "AII d=2", "D d=1"}; }

namespace {

std::string unsupported(const std::string& label, int d) {
  std::string s = "no numeric bulk-edge pipeline for class " + label + " in d = " + std::to_string(d) +
                  "; supported:";
  for (const auto& p : supported_pairs()) s += " [" + p + "]";
  return s;
}

/// Edge conductance of a class A or spin sector half-space Hamiltonian.
void conductance_pair(BecReport& r, const ops::ControlledOperator& h_hat, const idx::EdgeGeometry& g, double fermi,
                      double eps, const BecConfig& c) {
  std::pair<double, double> gap{fermi - eps, fermi + eps};
  auto delta = c.delta.value_or(std::pair{fermi - eps / 3, fermi + eps / 3});
  idx::EdgeConductanceOptions opts{.smooth_window = c.smooth_window, .windows = c.edge_windows};
  r.edge = idx::edge_conductance(h_hat, g, delta, gap, opts, c.tol);
  if (!c.delta) r.plateau = idx::edge_conductance(h_hat, g, {fermi - eps / 5, fermi + eps / 5}, gap, opts, c.tol);
}

BecReport run_pair(const BulkSystem& bulk, const geometry::Partition& part, const BecConfig& c) {
  BecReport r;
  auto label = sym::classify(bulk.spec);
  r.label = sym::to_string(label);
  r.dim = bulk.points()->dim();
  r.epsilon = bulk.gap.epsilon;
  const auto& ps = *bulk.points();
  auto windows = c.windows.empty() ? idx::default_windows(ps) : c.windows;
  const double f = bulk.fermi, eps = bulk.gap.epsilon;
  using sym::CartanLabel;

  if (label == CartanLabel::A && r.dim == 2) {
    auto s = sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec);
    r.bulk = idx::chern_even(idx::negative_projection(s), windows, c.tol);
    auto e = make_edge(bulk, part, c.depth);
    conductance_pair(r, e.H_hat, e.geometry, f, eps, c);
    if (c.boundary_pairing) {
      auto b = mv_boundary(s, part);
      r.boundary_pairing = idx::edge_winding(*b.module, b.u_hat, e.geometry, c.edge_windows, c.tol);
    }
  } else if (label == CartanLabel::AII && r.dim == 2) {
    r.bulk = idx::kane_mele(bulk.H, bulk.spec, windows, f, c.tol);
    auto e = make_edge(bulk, part, c.depth);
    auto up = idx::spin_sector(e.H_hat, 1);
    conductance_pair(r, up, e.geometry, f, eps, c);
    for (auto* rep : {&r.edge, r.plateau ? &*r.plateau : nullptr}) {
      if (!rep) continue;
      rep->is_z2 = true;
      rep->group = "Z2";
      rep->formula += " (spin-up sector, mod 2)";
      rep->warnings.clear();
      idx::snap(*rep, c.tol);
    }
    if (c.boundary_pairing) {
      auto hu = idx::spin_sector(bulk.H, 1);
      auto cu = ops::certify_gap(hu, {.fermi = f});
      if (!cu.valid) throw ComputationError("spin-up sector has no certified gap");
      auto b = mv_boundary(ops::flatten(hu, cu), part);
      r.boundary_pairing = idx::edge_winding(*b.module, b.u_hat, e.geometry, c.edge_windows, c.tol);
    }
  } else if (label == CartanLabel::AIII && r.dim == 1) {
    auto s = sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec);
    r.bulk = idx::chern_odd(s, bulk.spec, windows, c.tol);
    auto e = make_edge(bulk, part, c.depth);
    r.edge = idx::edge_fredholm(e.H_hat, e.spec, e.geometry);
  } else if (label == CartanLabel::AIII && r.dim == 3) {
    auto s = sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec);
    r.bulk = idx::chern_odd(s, bulk.spec, windows, c.tol);
    auto e = make_edge(bulk, part, c.depth);
    r.edge = idx::edge_chiral_3d(ops::restrict_to(s, e.module), e.spec, e.geometry, c.edge_windows, c.tol);
  } else if (label == CartanLabel::D && r.dim == 1) {
    if (!bulk.recipe) throw UsageError("class D in d = 1 needs a library model recipe to build its ring closures");
    r.bulk = idx::majorana_number(*bulk.recipe, bulk.points());
    auto e = make_edge(bulk, part, c.depth);
    r.edge = idx::edge_majorana(e.H_hat, e.geometry);
  } else {
    throw UsageError(unsupported(r.label, r.dim));
  }
  r.pass = r.bulk.snapped_ok && r.edge.snapped_ok && r.bulk.snapped == r.edge.snapped;
  return r;
}

SweepEntry run_sweep(const BulkSystem& bulk, const geometry::Partition& part, const BecConfig& c, SweepEntry entry) {
  try {
    std::optional<BulkSystem> b;
    if (entry.kind == "disorder") {
      if (bulk.recipe) {
        models::ModelConfig cfg = *bulk.recipe;
        cfg.params["W"] = entry.parameter;
        cfg.params["seed"] = static_cast<double>(entry.seed);
        b = make_bulk(models::build_model(cfg, bulk.points()), bulk.fermi);
      } else {
        auto v = models::symmetric_disorder(bulk.H.module_ptr(), bulk.spec, entry.parameter, entry.seed);
        b = make_bulk(bulk.H + v, bulk.spec, bulk.fermi);
      }
    } else {
      if (bulk.recipe && sym::classify(bulk.spec) == sym::CartanLabel::D)
        throw UsageError("truncation sweeps are not available for ring-closure formulas");
      b = make_bulk(ops::truncate(bulk.H, entry.parameter), bulk.spec, bulk.fermi, bulk.recipe);
    }
    entry.epsilon = b->gap.epsilon;
    BecReport r = run_pair(*b, part, c);
    entry.bulk = r.bulk;
    entry.edge = r.edge;
    entry.pass = r.pass;
  } catch (const std::exception& ex) {
    entry.error = ex.what();
    entry.pass = false;
  }
  return entry;
}

}  // namespace

BecReport verify_bec(const BulkSystem& bulk, const geometry::Partition& part, const BecConfig& config) {
  BecReport r = run_pair(bulk, part, config);
  std::vector<SweepEntry> todo;
  for (auto seed : config.disorder_seeds) {
    SweepEntry e;
    e.kind = "disorder";
    e.parameter = config.disorder_fraction * bulk.gap.epsilon;
    e.seed = seed;
    todo.push_back(e);
  }
  for (double radius : config.truncation_radii) {
    SweepEntry e;
    e.kind = "truncation";
    e.parameter = radius;
    todo.push_back(e);
  }

  const int jobs = std::max(1, config.jobs);
  std::vector<SweepEntry> done(todo.size());
  for (std::size_t start = 0; start < todo.size(); start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<SweepEntry>> batch;
    for (std::size_t k = start; k < std::min(todo.size(), start + static_cast<std::size_t>(jobs)); ++k)
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_sweep, std::cref(bulk),
                                 std::cref(part), std::cref(config), todo[k]));
    for (std::size_t k = 0; k < batch.size(); ++k) done[start + k] = batch[k].get();
  }
  for (auto& e : done) {
    if (e.pass && e.bulk && e.bulk->snapped != r.bulk.snapped) {
      e.pass = false;
      e.error = "snapped index differs from the unperturbed system";
    }
    r.pass = r.pass && e.pass;
  }
  r.sweeps = std::move(done);
  if (r.plateau && std::abs(r.plateau->raw - r.edge.raw) > 0.05)
    r.notes.push_back("edge conductance differs between the two energy windows by " +
                      std::to_string(std::abs(r.plateau->raw - r.edge.raw)));
  return r;
}

}  // namespace roelab
