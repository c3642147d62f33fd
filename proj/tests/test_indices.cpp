#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace test;

namespace {

idx::IndexReport bulk_chern(const models::Model& m) {
  auto bulk = make_bulk(m);
  auto s = sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec);
  return idx::chern_even(idx::negative_projection(s), idx::default_windows(*m.points));
}

idx::IndexReport bulk_winding(const models::Model& m) {
  auto bulk = make_bulk(m);
  return idx::chern_odd(sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec), bulk.spec, idx::default_windows(*m.points));
}

double qwz_fhs(double m) {
  return oracle::fhs_chern([m](double a, double b) { return oracle::qwz_bloch(m, a, b); }, 1);
}

/// Two independent models stacked on disjoint orbital sectors of one module.
ops::ControlledOperator direct_sum(const ops::ControlledOperator& a, const ops::ControlledOperator& b) {
  const int ma = a.module().orbitals, mb = b.module().orbitals, n = a.module().points->size();
  auto mod = ops::make_module(a.module().points, ma + mb);
  Eigen::MatrixXcd da = a.dense(), db = b.dense();
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n * (ma + mb), n * (ma + mb));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      d.block(x * (ma + mb), y * (ma + mb), ma, ma) = da.block(x * ma, y * ma, ma, ma);
      d.block(x * (ma + mb) + ma, y * (ma + mb) + ma, mb, mb) = db.block(x * mb, y * mb, mb, mb);
    }
  return ops::ControlledOperator::from_dense(mod, d, std::nullopt, true);
}

}  // namespace

TEST_CASE("trace per unit volume examples") {
  auto ps = square(12);
  auto mod = ops::make_module(ps, 3);
  auto t = idx::trace_per_unit_volume(ops::ControlledOperator::identity(mod), {2, 3, 4});
  for (auto v : t.values) CHECK(v.real() == doctest::Approx(3.0));
  CHECK(t.error == doctest::Approx(0.0));

  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(mod->dimension(), mod->dimension());
  for (int x = 0; x < ps->size(); ++x) z(3 * x, 3 * x) = 1, z(3 * x + 1, 3 * x + 1) = -1;
  auto tz = idx::trace_per_unit_volume(ops::ControlledOperator::from_dense(mod, z, 0.0, true), {2, 3, 4});
  for (auto v : tz.values) CHECK(std::abs(v) < 1e-14);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(mod->dimension(), mod->dimension());
  for (int i = 0; i < r.rows(); ++i) r(i, i) = u(rng);
  auto tr = idx::trace_per_unit_volume(ops::ControlledOperator::from_dense(mod, r, 0.0, true), {2, 3});
  auto center = idx::sample_center(*ps);
  for (std::size_t k = 0; k < 2; ++k) {
    double n = tr.windows[k], sum = 0;
    int count = 0;
    for (int x = 0; x < ps->size(); ++x) {
      Eigen::VectorXd c = ps->coord(x) - center;
      if (c.cwiseAbs().maxCoeff() <= n && (c.array() < n).all()) {
        for (int o = 0; o < 3; ++o) sum += r(3 * x + o, 3 * x + o).real();
        ++count;
      }
    }
    CHECK(tr.counts[k] == count);
    CHECK(tr.values[k].real() == doctest::Approx(sum / count));
  }
  CHECK_THROWS_AS(idx::trace_per_unit_volume(ops::ControlledOperator::identity(mod), {9}), UsageError);
}

TEST_CASE("trace per unit volume is tracial up to a boundary term") {
  auto mod = ops::make_module(square(30), 1);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = two_domain_hopping(mod, rng);
    auto t = idx::trace_per_unit_volume(a * a.adjoint() - a.adjoint() * a, {3, 6, 12});
    for (std::size_t k = 1; k < 3; ++k) CHECK(std::abs(t.values[k]) < std::abs(t.values[k - 1]));
    // the defect is the boundary flux (b^2 - a^2) / (2n) of the rightward hops
    CHECK(std::abs(t.values[2]) * 24 == doctest::Approx(std::abs(t.values[1]) * 12).epsilon(0.3));
  }
  auto b = random_operator(mod, 1.5, rng, false);
  auto c = random_operator(mod, 1.5, rng, false);
  auto t = idx::trace_per_unit_volume(b * c - c * b, {3, 6, 9});
  Eigen::MatrixXcd bd = b.dense(), cd = c.dense();
  auto center = idx::sample_center(*mod->points);
  for (std::size_t k = 0; k < 3; ++k) {
    auto inside = idx::window_sites(*mod->points, center, t.windows[k]);
    std::vector<char> in(static_cast<std::size_t>(mod->sites()), 0);
    for (int x : inside) in[static_cast<std::size_t>(x)] = 1;
    double flux = 0;
    for (int x : inside)
      for (int y = 0; y < mod->sites(); ++y)
        if (!in[static_cast<std::size_t>(y)]) flux += std::abs(bd(x, y) * cd(y, x)) + std::abs(cd(x, y) * bd(y, x));
    CHECK(std::abs(t.values[k]) <= flux / static_cast<double>(inside.size()) + 1e-12);
  }
}

TEST_CASE("snap rules") {
  idx::IndexReport r;
  r.raw = 0.97;
  idx::snap(r);
  CHECK(r.snapped_ok);
  CHECK(r.snapped == 1);
  r.raw = -1.86;
  idx::snap(r);
  CHECK_FALSE(r.snapped_ok);
  CHECK_FALSE(r.warnings.empty());
  idx::IndexReport z;
  z.is_z2 = true;
  z.raw = 2.8;
  idx::snap(z);
  CHECK(z.snapped_ok);
  CHECK(z.snapped == 1);
  CHECK(z.snapped_text() == "Z2:1");
  z.raw = 1.5;
  idx::snap(z);
  CHECK_FALSE(z.snapped_ok);
}

TEST_CASE("chern_even of trivial projections vanishes") {
  auto mod = ops::make_module(square(10), 2);
  CHECK(idx::chern_even(ops::ControlledOperator::zero(mod), {2, 3}).raw == 0.0);
  auto one = idx::chern_even(ops::ControlledOperator::identity(mod), {2, 3});
  CHECK(one.raw == 0.0);
  CHECK(one.snapped == 0);
  Eigen::MatrixXcd half = 0.5 * Eigen::MatrixXcd::Identity(mod->dimension(), mod->dimension());
  CHECK_THROWS_AS(idx::chern_even(ops::ControlledOperator::from_dense(mod, half, 0.0, true), {2, 3}), UsageError);
}

TEST_CASE("chern_even matches the momentum-space Chern number") {
  for (double m : {-1.0, 1.0, 3.0}) {
    auto r = bulk_chern(model("qwz", square(20), {{"m", m}}));
    CHECK(r.snapped_ok);
    CHECK(r.snapped == static_cast<int>(std::lround(qwz_fhs(m))));
    CHECK(std::abs(r.imag) < 1e-8);
    CHECK(r.group == "Z");
  }
}

TEST_CASE("chern_even is additive over direct sums") {
  auto a = model("qwz", square(16), {{"m", 1.0}});
  auto b = model("qwz", square(16), {{"m", -1.0}});
  auto c = model("qwz", square(16), {{"m", 1.2}});
  auto w = idx::default_windows(*a.points);
  auto index_of = [&](const ops::ControlledOperator& h) {
    auto s = ops::flatten(h, ops::certify_gap(h));
    return idx::chern_even(idx::negative_projection(s), w).raw;
  };
  double ra = index_of(a.H), rb = index_of(b.H), rc = index_of(c.H);
  CHECK(index_of(direct_sum(a.H, c.H)) == doctest::Approx(ra + rc).epsilon(1e-6));
  CHECK(index_of(direct_sum(a.H, b.H)) == doctest::Approx(ra + rb).epsilon(1e-6));
  CHECK(std::lround(ra + rc) == 2);
}

TEST_CASE("chern_odd of a trivial chiral block vanishes") {
  auto mod = ops::make_module(lattice(1, {20}), 2, Eigen::Vector2i(1, -1));
  Eigen::MatrixXcd sx = Eigen::MatrixXcd::Zero(40, 40);
  for (int x = 0; x < 20; ++x) sx(2 * x, 2 * x + 1) = sx(2 * x + 1, 2 * x) = 1;
  auto s = ops::ControlledOperator::from_dense(mod, sx, 0.0, true);
  auto spec = sym::chiral_from_grading(*mod);
  auto r = idx::chern_odd(s, spec, {4, 6});
  CHECK(r.raw == doctest::Approx(0.0));
  Eigen::MatrixXcd sz = Eigen::MatrixXcd::Identity(40, 40);
  auto bad = ops::ControlledOperator::from_dense(mod, sz, 0.0, true);
  CHECK_THROWS_AS(idx::chern_odd(bad, spec, {4, 6}), UsageError);
}

TEST_CASE("chern_odd matches the SSH momentum winding") {
  for (auto [t1, t2] : {std::pair{0.5, 1.0}, std::pair{1.0, 0.5}}) {
    auto r = bulk_winding(model("ssh", lattice(1, {200}), {{"t1", t1}, {"t2", t2}}));
    double w = oracle::winding_1d([&](double k) { return oracle::ssh_block(t1, t2, k); });
    CHECK(r.snapped_ok);
    CHECK(r.snapped == std::lround(w));
    CHECK(std::abs(r.raw - std::lround(w)) < 0.01);
  }
}

TEST_CASE("SSH winding survives chiral disorder") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto r = bulk_winding(model("ssh", lattice(1, {200}), {{"t1", 0.5}, {"t2", 1.0}, {"W", 0.3}, {"seed", double(seed)}}));
    CHECK(r.snapped == 1);
  }
}

TEST_CASE("chern_odd in three dimensions matches the momentum-space degree") {
  auto r = bulk_winding(model("aiii3d", lattice(3, {8, 8, 8}), {{"m", 2.0}}));
  CHECK(r.snapped_ok);
  CHECK(r.snapped == std::lround(oracle::winding_3d_aiii(2.0, 24)));
}

TEST_CASE("Kane-Mele Z2 matches the Wilson-loop oracle") {
  for (double lv : {0.1, 0.4}) {
    auto m = model("kane_mele", square(18), {{"lambda_so", 0.06}, {"lambda_v", lv}});
    auto bulk = make_bulk(m);
    auto r = idx::kane_mele(bulk.H, bulk.spec, idx::default_windows(*m.points));
    int z2 = oracle::wilson_loop_z2([lv](double a, double b) { return oracle::kane_mele_bloch(1, 0.06, lv, a, b); }, 2);
    CHECK(r.is_z2);
    CHECK(r.snapped_ok);
    CHECK(r.snapped == z2);
    CHECK(r.snapped_text() == "Z2:" + std::to_string(z2));
  }
}

TEST_CASE("Kane-Mele formula rejects spin mixing") {
  auto m = model("kane_mele", square(6));
  Eigen::MatrixXcd mix = Eigen::MatrixXcd::Zero(4, 4);
  mix(0, 3) = mix(3, 0) = 0.05;
  mix(1, 2) = mix(2, 1) = -0.05;
  ops::BlockBuilder b(m.module);
  for (int x = 0; x < m.points->size(); ++x) b.add(x, x, mix);
  auto h = m.H + b.build(true);
  try {
    idx::kane_mele(h, m.spec, {1, 2});
    FAIL("expected spin mixing to be rejected");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("S_z") != std::string::npos);
  }
}

TEST_CASE("Pfaffian sign against the expansion formula") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n : {2, 4, 6, 8}) {
    for (int k = 0; k < 20; ++k) {
      Eigen::MatrixXd a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = g(rng);
      a = (a - a.transpose()).eval();
      double pf = oracle::pfaffian(a);
      CHECK(pf * pf == doctest::Approx(a.determinant()).epsilon(1e-8));
      CHECK(idx::pfaffian_sign(a) == (pf > 0 ? 1 : -1));
    }
  }
}

TEST_CASE("Majorana number of the Kitaev chain") {
  for (double mu : {0.5, -1.5, 2.5, 3.0}) {
    auto r = idx::majorana_number(models::ModelConfig{"kitaev", {{"mu", mu}}, "open"}, lattice(1, {60}));
    CHECK(r.is_z2);
    CHECK(r.snapped == oracle::kitaev_majorana(1.0, mu));
  }
}

TEST_CASE("edge conductance examples") {
  auto m = model("qwz", square(20), {{"m", 1.0}});
  auto bulk = make_bulk(m);
  auto part = middle_cut(*m.points);
  auto e = make_edge(bulk, part);
  const double eps = bulk.gap.epsilon;
  auto r = idx::edge_conductance(e.H_hat, e.geometry, {-eps / 3, eps / 3}, {-eps, eps});
  CHECK(r.snapped_ok);
  CHECK(r.snapped == bulk_chern(m).snapped);
  CHECK(std::abs(r.raw - r.snapped) < 0.1);

  auto flipped = e.geometry;
  flipped.tangent = -flipped.tangent;
  auto rf = idx::edge_conductance(e.H_hat, flipped, {-eps / 3, eps / 3}, {-eps, eps});
  CHECK(rf.raw == doctest::Approx(-r.raw));

  CHECK_THROWS_AS(idx::edge_conductance(e.H_hat, e.geometry, {0.5 * eps, 1.5 * eps}, {-eps, eps}), UsageError);

  auto trivial = model("qwz", square(20), {{"m", 3.0}});
  auto tb = make_bulk(trivial);
  auto te = make_edge(tb, middle_cut(*trivial.points));
  const double teps = tb.gap.epsilon;
  auto rt = idx::edge_conductance(te.H_hat, te.geometry, {-teps / 3, teps / 3}, {-teps, teps});
  CHECK(std::abs(rt.raw) < 1e-6);
  CHECK(rt.snapped == 0);
}

TEST_CASE("edge Fredholm index on the SSH half-line") {
  for (auto [t1, t2, expect] : {std::tuple{0.5, 1.0, 1}, std::tuple{1.0, 0.5, 0}}) {
    auto m = model("ssh", lattice(1, {200}), {{"t1", t1}, {"t2", t2}});
    auto bulk = make_bulk(m);
    auto e = make_edge(bulk, middle_cut(*m.points));
    auto r = idx::edge_fredholm(e.H_hat, e.spec, e.geometry);
    CHECK(r.snapped_ok);
    CHECK(r.snapped == expect);
    CHECK(r.snapped == bulk_winding(m).snapped);
  }
}

TEST_CASE("edge Fredholm index of an invertible block is zero") {
  auto mod = ops::make_module(lattice(1, {20}), 2, Eigen::Vector2i(1, -1));
  Eigen::MatrixXcd sx = Eigen::MatrixXcd::Zero(40, 40);
  for (int x = 0; x < 20; ++x) sx(2 * x, 2 * x + 1) = sx(2 * x + 1, 2 * x) = 1;
  auto h = ops::ControlledOperator::from_dense(mod, sx, 0.0, true);
  auto spec = sym::chiral_from_grading(*mod);
  auto part = middle_cut(*mod->points);
  auto sub = ops::restrict_module(mod, part.plus_ids);
  auto plus = mod->points->subset(part.plus_ids);
  auto g = idx::edge_geometry(plus, part);
  auto r = idx::edge_fredholm(ops::restrict_to(h, sub), spec, g);
  CHECK(r.raw == 0.0);
  CHECK(r.snapped == 0);
}

TEST_CASE("edge Majorana parity of the Kitaev half-line") {
  for (auto [mu, expect] : {std::pair{0.5, 1}, std::pair{3.0, 0}}) {
    auto m = model("kitaev", lattice(1, {120}), {{"mu", mu}});
    auto bulk = make_bulk(m);
    auto e = make_edge(bulk, middle_cut(*m.points));
    auto r = idx::edge_majorana(e.H_hat, e.geometry);
    CHECK(r.snapped == expect);
  }
}

TEST_CASE("index report JSON") {
  idx::IndexReport r;
  r.raw = 0.98;
  r.formula = "chern_even";
  r.group = "Z";
  r.windows = {1, 2};
  r.window_values = {0.9, 0.98};
  idx::snap(r);
  auto j = io::to_json(r);
  CHECK(j["snapped"] == 1);
  CHECK(j["raw"] == 0.98);
  CHECK(j["windows"].size() == 2);
  r.raw = 0.5;
  idx::snap(r);
  CHECK(io::to_json(r)["snapped"].is_null());
  idx::IndexReport z;
  z.is_z2 = true;
  z.raw = 1.02;
  idx::snap(z);
  CHECK(io::to_json(z)["snapped"] == "Z2:1");
}
