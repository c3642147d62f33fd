#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace test;
using geometry::PointSet;

namespace {

double min_distance(const PointSet& ps) {
  double best = 1e300;
  for (int a = 0; a < ps.size(); ++a)
    for (int b = a + 1; b < ps.size(); ++b) best = std::min(best, ps.distance(a, b));
  return best;
}

std::vector<int> brute_penumbra(const PointSet& ps, const std::vector<int>& subset, double r) {
  std::vector<int> out;
  for (int x = 0; x < ps.size(); ++x)
    for (int y : subset)
      if (ps.distance(x, y) < r) {
        out.push_back(x);
        break;
      }
  return out;
}

}  // namespace

TEST_CASE("square lattice window [0,4)^2 has 16 integer points") {
  auto ps = geometry::generate(geometry::LatticeSpec{2, {4, 4}, 1.0});
  CHECK(ps.size() == 16);
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < ps.size(); ++i) {
    auto c = ps.coord(i);
    CHECK(c[0] == std::round(c[0]));
    CHECK(c[1] == std::round(c[1]));
    CHECK(ps.window().contains(c));
    seen.insert({static_cast<int>(c[0]), static_cast<int>(c[1])});
  }
  CHECK(seen.size() == 16);
}

TEST_CASE("perturbed lattice keeps pairwise distances above 1 - 2 jitter") {
  auto ps = geometry::generate(geometry::PerturbedLatticeSpec{2, {4, 4}, 0.2, 7});
  CHECK(ps.size() == 16);
  CHECK(min_distance(ps) >= 0.6);
  auto again = geometry::generate(geometry::PerturbedLatticeSpec{2, {4, 4}, 0.2, 7});
  CHECK(again.coords() == ps.coords());
  auto cert = geometry::certify_delone(ps);
  CHECK(cert.valid);
  CHECK(cert.packing_radius >= 0.3);
  CHECK(cert.packing_radius == doctest::Approx(0.5 * min_distance(ps)));
}

TEST_CASE("perturbed lattice rejects jitter of half the spacing") {
  CHECK_THROWS_AS(geometry::generate(geometry::PerturbedLatticeSpec{2, {4, 4}, 0.5, 1}), UsageError);
}

TEST_CASE("Fibonacci chain matches the direct cut-and-project enumeration") {
  for (double length : {20.0, 57.5}) {
    auto ps = geometry::generate(geometry::FibonacciSpec{length});
    CHECK(ps.size() == oracle::fibonacci_count(length));
    for (int i = 0; i + 1 < ps.size(); ++i) {
      double gap = ps.coord(i + 1)[0] - ps.coord(i)[0];
      bool tile = std::abs(gap - 1.0) < 1e-9 || std::abs(gap - std::numbers::phi) < 1e-9;
      CHECK(tile);
    }
  }
}

TEST_CASE("Ammann-Beenker sample is Delone") {
  auto ps = geometry::generate(geometry::AmmannBeenkerSpec{6.0});
  CHECK(ps.size() > 20);
  auto cert = geometry::certify_delone(ps);
  CHECK(cert.valid);
  CHECK(cert.covering_radius.has_value());
}

TEST_CASE("Delone certificate of the unit square lattice") {
  auto ps = geometry::generate(geometry::LatticeSpec{2, {8, 8}, 1.0});
  auto cert = geometry::certify_delone(ps);
  CHECK(cert.valid);
  CHECK(cert.packing_radius == doctest::Approx(0.5));
  REQUIRE(cert.covering_radius.has_value());
  CHECK(*cert.covering_radius == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
}

TEST_CASE("Delone certificate of a cubic lattice") {
  auto ps = geometry::generate(geometry::LatticeSpec{3, {5, 5, 5}, 1.0});
  auto cert = geometry::certify_delone(ps);
  CHECK(cert.packing_radius == doctest::Approx(0.5));
  REQUIRE(cert.covering_radius.has_value());
  CHECK(*cert.covering_radius == doctest::Approx(std::sqrt(0.75)).epsilon(0.02));
}

TEST_CASE("Delone certificate edge cases") {
  Eigen::VectorXd p(1);
  p << 1.0;
  auto twice = geometry::generate(geometry::ExplicitSpec{1, {p, p}, std::nullopt});
  CHECK_FALSE(geometry::certify_delone(twice).valid);
  auto single = geometry::generate(geometry::ExplicitSpec{1, {p}, std::nullopt});
  auto c = geometry::certify_delone(single);
  CHECK(c.valid);
  CHECK(c.single_point);
  CHECK_FALSE(c.covering_radius.has_value());
}

TEST_CASE("penumbra definition") {
  auto ps = geometry::generate(geometry::LatticeSpec{2, {8, 8}, 1.0});
  std::vector<int> half;
  for (int i = 0; i < ps.size(); ++i)
    if (ps.coord(i)[0] >= 3) half.push_back(i);
  CHECK(geometry::penumbra(ps, half, 0.0).empty());
  auto tiny = geometry::penumbra(ps, half, 1e-9);
  CHECK(tiny == half);
  auto pen = geometry::penumbra(ps, half, 1.5);
  std::vector<int> expect;
  for (int i = 0; i < ps.size(); ++i)
    if (ps.coord(i)[0] >= 2) expect.push_back(i);
  CHECK(pen == expect);
  CHECK(geometry::penumbra(ps, std::vector<int>{}, 3.0).empty());
}

TEST_CASE("penumbra of random subsets equals a brute-force scan and grows with R") {
  auto ps = geometry::generate(geometry::PerturbedLatticeSpec{2, {9, 9}, 0.3, 11});
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, ps.size() - 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::set<int> s;
    for (int k = 0; k < 6; ++k) s.insert(pick(rng));
    std::vector<int> subset(s.begin(), s.end());
    std::vector<int> prev;
    for (double r : {0.5, 1.0, 1.7, 2.5}) {
      auto pen = geometry::penumbra(ps, subset, r);
      CHECK(pen == brute_penumbra(ps, subset, r));
      CHECK(std::includes(pen.begin(), pen.end(), prev.begin(), prev.end()));
      prev = pen;
    }
  }
}

TEST_CASE("axis cut: interface is the first plus column") {
  auto ps = geometry::generate(geometry::LatticeSpec{2, {6, 6}, 1.0});
  Eigen::Vector2d n(1, 0);
  auto part = geometry::partition_halfspace(ps, n, 3.0, 1.0);
  CHECK(part.plus_ids.size() == 18);
  CHECK(part.minus_ids.size() == 18);
  REQUIRE(part.interface_ids.size() == 6);
  for (int id : part.interface_ids) CHECK(ps.coord(id)[0] == 3.0);
}

TEST_CASE("cut outside the window is rejected") {
  auto ps = geometry::generate(geometry::LatticeSpec{2, {6, 6}, 1.0});
  CHECK_THROWS_AS(geometry::partition_halfspace(ps, Eigen::Vector2d(1, 0), 40.0, 1.0), UsageError);
  CHECK_THROWS_AS(geometry::partition_halfspace(ps, Eigen::Vector2d(1, 0), 2.0, 0.0), UsageError);
  CHECK_THROWS_AS(geometry::partition_halfspace(ps, Eigen::Vector2d(0, 0), 2.0, 1.0), UsageError);
}

TEST_CASE("tilted cuts match the brute-force membership test") {
  auto ps = geometry::generate(geometry::PerturbedLatticeSpec{2, {10, 10}, 0.2, 3});
  for (double deg : {0.0, 10.0, 15.0, 37.0, 120.0}) {
    double a = deg * std::numbers::pi / 180;
    Eigen::Vector2d n(2 * std::cos(a), 2 * std::sin(a));
    double offset = n.dot(Eigen::Vector2d(4.5, 4.5));
    auto part = geometry::partition_halfspace(ps, n, offset, 1.3);
    std::vector<int> plus, minus, iface;
    for (int i = 0; i < ps.size(); ++i) {
      double s = (n.dot(ps.coord(i)) - offset) / n.norm();
      (s >= 0 ? plus : minus).push_back(i);
      if (s >= 0 && s < 1.3) iface.push_back(i);
    }
    CHECK(part.plus_ids == plus);
    CHECK(part.minus_ids == minus);
    CHECK(part.interface_ids == iface);
    CHECK(part.plus_ids.size() + part.minus_ids.size() == static_cast<std::size_t>(ps.size()));
  }
}

TEST_CASE("default interface thickness is twice the packing diameter") {
  auto ps = geometry::generate(geometry::LatticeSpec{2, {6, 6}, 1.0});
  auto part = geometry::partition_halfspace(ps, Eigen::Vector2d(1, 0), 3.0);
  CHECK(part.thickness == doctest::Approx(2.0));
}

TEST_CASE("C4 rotations permute a centred square sample") {
  auto ps = geometry::generate(geometry::LatticeSpec{2, {5, 5}, 1.0});
  Eigen::MatrixXcd blk = Eigen::MatrixXcd::Identity(1, 1);
  auto g = geometry::cyclic_rotation_group(ps, 4, Eigen::Vector2d(2, 2), blk);
  REQUIRE(g.elements.size() == 4);
  for (std::size_t e = 0; e < 4; ++e) {
    std::set<int> image;
    for (int x = 0; x < ps.size(); ++x) {
      int y = g.site_permutation[e][static_cast<std::size_t>(x)];
      REQUIRE(y >= 0);
      CHECK((g.elements[e].apply(ps.coord(x)) - ps.coord(y)).norm() < 1e-9);
      image.insert(y);
    }
    CHECK(image.size() == static_cast<std::size_t>(ps.size()));
  }
  // composition: r o r is the element of order two
  for (int x = 0; x < ps.size(); ++x) {
    int rr = g.site_permutation[1][static_cast<std::size_t>(g.site_permutation[1][static_cast<std::size_t>(x)])];
    CHECK(rr == g.site_permutation[2][static_cast<std::size_t>(x)]);
  }
}

TEST_CASE("point set JSON round trip") {
  auto ps = geometry::generate(geometry::PerturbedLatticeSpec{2, {3, 4}, 0.1, 2});
  auto j = io::to_json(ps);
  CHECK(j["dim"] == 2);
  CHECK(j["points"].size() == 12);
  CHECK(j["points"][0].size() == 3);
  auto back = io::pointset_from_json(j);
  CHECK(back.size() == ps.size());
  CHECK((back.coords() - ps.coords()).norm() == 0.0);
  CHECK((back.window().lo - ps.window().lo).norm() == 0.0);
}
