#include "support.hpp"

#include <doctest.h>

using namespace test;

TEST_CASE("make_bulk validates symmetry and gap") {
  auto m = model("qwz", square(8));
  auto bulk = make_bulk(m);
  CHECK(bulk.gap.valid);
  CHECK(bulk.recipe.has_value());
  auto wrong = m.spec;
  wrong.has_P = true;
  wrong.P_unitary = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(make_bulk(m.H, wrong), UsageError);
  auto gapless = model("ssh", lattice(1, {40}), {{"t1", 1.0}, {"t2", 1.0}}, "periodic");
  CHECK_THROWS_AS(make_bulk(gapless.H, gapless.spec), ComputationError);
}

TEST_CASE("make_edge of a diagonal Hamiltonian is the diagonal restriction") {
  auto ps = square(8);
  auto mod = ops::make_module(ps, 1);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(64, 64);
  for (int i = 0; i < 64; ++i) d(i, i) = (i % 2) ? 1.0 : -1.5;
  auto bulk = make_bulk(ops::ControlledOperator::from_dense(mod, d, 0.0, true), sym::no_symmetry());
  auto part = middle_cut(*ps);
  auto e = make_edge(bulk, part);
  CHECK(e.in_gap_states == 0);
  REQUIRE(e.H_hat.dimension() == static_cast<int>(part.plus_ids.size()));
  for (std::size_t k = 0; k < part.plus_ids.size(); ++k) {
    int i = static_cast<int>(k);
    CHECK(e.H_hat.dense()(i, i) == d(part.plus_ids[k], part.plus_ids[k]));
  }
  CHECK(e.H_hat.matrix().nonZeros() == static_cast<int>(part.plus_ids.size()));
}

TEST_CASE("QWZ edge states sit at the interface or the sample faces") {
  auto m = model("qwz", square(20), {{"m", 1.0}});
  auto bulk = make_bulk(m);
  auto part = middle_cut(*m.points);
  auto e = make_edge(bulk, part);
  CHECK(e.in_gap_states > 0);
  CHECK(e.max_away_weight < 0.5);
  // weight of in-gap eigenvectors within 3 sites of the cut or the sample faces
  auto es = spectral::eigh(e.H_hat.dense());
  const auto& plus = *e.module->points;
  auto box = m.points->bounding_box();
  double worst = 1.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    if (std::abs(es.values[k]) >= bulk.gap.epsilon) continue;
    double near = 0;
    for (int x = 0; x < plus.size(); ++x) {
      Eigen::VectorXd c = plus.coord(x);
      double to_cut = part.cut.signed_distance(c);
      double to_face = std::min({c[0] - box.lo[0], box.hi[0] - c[0], c[1] - box.lo[1], box.hi[1] - c[1]});
      if (std::min(to_cut, to_face) < 3.0) near += es.vectors.block(2 * x, k, 2, 1).squaredNorm();
    }
    worst = std::min(worst, near);
  }
  CHECK(worst > 0.8);
}

TEST_CASE("empty interface is rejected") {
  auto ps = square(8);
  CHECK_THROWS_AS(geometry::partition_halfspace(*ps, Eigen::Vector2d(1, 0), 30.0), UsageError);
}

TEST_CASE("boundary map of a pure grading is trivial") {
  auto ps = square(10);
  auto mod = ops::make_module(ps, 2, Eigen::Vector2i(1, -1));
  auto g = ops::ControlledOperator::grading(mod);
  auto part = middle_cut(*ps);
  auto b = mv_boundary(g, part);
  Eigen::MatrixXcd one = Eigen::MatrixXcd::Identity(b.u_hat.rows(), b.u_hat.cols());
  CHECK((b.u_hat - one).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.s_hat * b.s_hat - one).cwiseAbs().maxCoeff() < 1e-12);
  auto plus = ps->subset(part.plus_ids);
  auto geo = idx::edge_geometry(plus, part);
  CHECK(idx::edge_winding(*b.module, b.u_hat, geo, idx::default_edge_windows(plus, geo)).raw == doctest::Approx(0.0));
}

TEST_CASE("boundary map rejects a non-symmetry") {
  auto m = model("qwz", square(6));
  CHECK_THROWS_AS(mv_boundary(m.H, middle_cut(*m.points)), UsageError);
}

TEST_CASE("boundary map of QWZ: unitary, local, and pairing with the bulk Chern number") {
  auto m = model("qwz", square(20), {{"m", 1.0}});
  auto bulk = make_bulk(m);
  auto s = ops::flatten(bulk.H, bulk.gap);
  auto part = middle_cut(*m.points);
  auto b = mv_boundary(s, part);
  CHECK(b.unitarity_defect < 1e-10);
  CHECK(b.decay_length > 0);
  CHECK(b.decay_length < 3.0);
  for (std::size_t k = 1; k < b.profile_value.size(); ++k)
    if (b.profile_distance[k] > 2 && b.profile_distance[k] < 8 && b.profile_value[k] > 0) CHECK(b.profile_value[k] < b.profile_value[k - 1] * 1.05);
  auto plus = m.points->subset(part.plus_ids);
  auto geo = idx::edge_geometry(plus, part);
  auto w = idx::edge_winding(*b.module, b.u_hat, geo, idx::default_edge_windows(plus, geo));
  auto c = idx::chern_even(idx::negative_projection(s), idx::default_windows(*m.points));
  CHECK(w.snapped == c.snapped);
}

TEST_CASE("boundary map deviates from 1 only near the interface") {
  // elongated sample: a long plus side makes room for rows far from the cut and the faces
  auto ps = lattice(2, {48, 20});
  auto m = model("qwz", ps, {{"m", 1.0}});
  auto bulk = make_bulk(m);
  auto s = ops::flatten(bulk.H, bulk.gap);
  auto part = geometry::partition_halfspace(*ps, Eigen::Vector2d(1, 0), 8.0);
  auto b = mv_boundary(s, part, {.deep_distance = 22.0, .face_margin = 6.0});
  REQUIRE_FALSE(std::isnan(b.off_interface_deviation));
  CHECK(b.off_interface_deviation < 1e-6);
  CHECK(b.unitarity_defect < 1e-10);
}

TEST_CASE("boundary classes add under direct sums") {
  auto ps = square(16);
  auto a = model("qwz", ps, {{"m", 1.0}});
  auto c = model("qwz", ps, {{"m", -1.0}});
  auto part = middle_cut(*ps);
  auto plus = ps->subset(part.plus_ids);
  auto pairing = [&](const ops::ControlledOperator& h) {
    auto s = ops::flatten(h, ops::certify_gap(h));
    auto b = mv_boundary(s, part);
    auto geo = idx::edge_geometry(plus, part);
    return idx::edge_winding(*b.module, b.u_hat, geo, idx::default_edge_windows(plus, geo)).raw;
  };
  const int n = ps->size();
  auto mod = ops::make_module(ps, 4);
  Eigen::MatrixXcd da = a.H.dense(), d = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      d.block(4 * x, 4 * y, 2, 2) = da.block(2 * x, 2 * y, 2, 2);
      d.block(4 * x + 2, 4 * y + 2, 2, 2) = da.block(2 * x, 2 * y, 2, 2);
    }
  auto doubled = ops::ControlledOperator::from_dense(mod, d, std::nullopt, true);
  double pa = pairing(a.H), pc = pairing(c.H);
  CHECK(pairing(doubled) == doctest::Approx(2 * pa).epsilon(1e-6));
  CHECK(std::lround(pa) == -std::lround(pc));
}

TEST_CASE("verify_bec on QWZ, SSH and a trivial phase") {
  auto q = model("qwz", square(20), {{"m", 1.0}});
  auto rq = verify_bec(make_bulk(q), middle_cut(*q.points));
  CHECK(rq.pass);
  CHECK(rq.bulk.snapped == 1);
  CHECK(rq.edge.snapped == 1);
  CHECK(rq.label == "A");
  REQUIRE(rq.plateau.has_value());
  REQUIRE(rq.boundary_pairing.has_value());
  CHECK(rq.boundary_pairing->snapped == 1);

  auto s = model("ssh", lattice(1, {200}), {{"t1", 0.5}, {"t2", 1.0}});
  auto rs = verify_bec(make_bulk(s), middle_cut(*s.points));
  CHECK(rs.pass);
  CHECK(std::abs(rs.bulk.snapped) == 1);
  CHECK(rs.edge.snapped == rs.bulk.snapped);

  auto t = model("qwz", square(16), {{"m", 3.0}});
  auto rt = verify_bec(make_bulk(t), middle_cut(*t.points));
  CHECK(rt.pass);
  CHECK(rt.bulk.snapped == 0);
  CHECK(rt.edge.snapped == 0);

  auto j = io::to_json(rq);
  for (const char* key : {"bulk", "edge", "pass", "sweeps"}) CHECK(j.contains(key));
}

TEST_CASE("verify_bec rejects unsupported classes and lists the supported ones") {
  auto m = model("ti3d", lattice(3, {4, 4, 4}));
  auto bulk = make_bulk(m);
  try {
    verify_bec(bulk, middle_cut(*m.points));
    FAIL("expected an unsupported-pair error");
  } catch (const UsageError& e) {
    std::string msg = e.what();
    CHECK(msg.find("AII") != std::string::npos);
    CHECK(msg.find("A d=2") != std::string::npos);
  }
  CHECK(supported_pairs().size() == 5);
}

TEST_CASE("verify_bec sweeps over disorder and truncation") {
  auto m = model("ssh", lattice(1, {120}), {{"t1", 0.5}, {"t2", 1.0}});
  BecConfig c;
  c.disorder_seeds = {1, 2, 3};
  c.truncation_radii = {1.5, 4.0};
  c.jobs = 2;
  auto r = verify_bec(make_bulk(m), middle_cut(*m.points), c);
  CHECK(r.pass);
  REQUIRE(r.sweeps.size() == 5);
  for (const auto& e : r.sweeps) {
    CHECK(e.pass);
    REQUIRE(e.bulk.has_value());
    CHECK(e.bulk->snapped == r.bulk.snapped);
  }
  c.jobs = 1;
  auto serial = verify_bec(make_bulk(m), middle_cut(*m.points), c);
  CHECK(io::to_json(serial).dump() == io::to_json(r).dump());
}

TEST_CASE("equivalence relations leave the indices unchanged") {
  auto m = model("qwz", square(16), {{"m", 1.0}});
  auto part = middle_cut(*m.points);
  auto base = verify_bec(make_bulk(m), part);
  REQUIRE(base.pass);

  SUBCASE("conjugation by an on-site unitary") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    ops::BlockBuilder b(m.module);
    for (int x = 0; x < m.points->size(); ++x) {
      Eigen::MatrixXcd a(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = cplx(g(rng), g(rng));
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
      b.add(x, x, qr.householderQ());
    }
    auto u = b.build(false);
    auto h = u * m.H * u.adjoint();
    auto herm = ops::ControlledOperator::from_dense(m.module, 0.5 * (h.dense() + h.dense().adjoint()), std::nullopt, true);
    auto r = verify_bec(make_bulk(herm, m.spec), part);
    CHECK(r.pass);
    CHECK(r.bulk.snapped == base.bulk.snapped);
    CHECK(r.edge.snapped == base.edge.snapped);
  }
  SUBCASE("direct sum with a grading") {
    const int n = m.points->size();
    auto mod = ops::make_module(m.points, 4);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4 * n, 4 * n), h = m.H.dense();
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) d.block(4 * x, 4 * y, 2, 2) = h.block(2 * x, 2 * y, 2, 2);
      d(4 * x + 2, 4 * x + 2) = 1;
      d(4 * x + 3, 4 * x + 3) = -1;
    }
    auto r = verify_bec(make_bulk(ops::ControlledOperator::from_dense(mod, d, std::nullopt, true), sym::no_symmetry()), part);
    CHECK(r.pass);
    CHECK(r.bulk.snapped == base.bulk.snapped);
  }
  SUBCASE("homotopy along a gapped path") {
    for (double mass : {1.2, 1.5}) {
      auto r = verify_bec(make_bulk(model("qwz", m.points, {{"m", mass}})), part);
      CHECK(r.pass);
      CHECK(r.bulk.snapped == base.bulk.snapped);
    }
  }
}
