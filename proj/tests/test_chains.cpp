#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "glc/chain.hpp"
#include "glc/chain_io.hpp"
#include "glc/errors.hpp"

using namespace glc;

namespace {
constexpr double kPi = std::numbers::pi;

// Brute-force flat norm of a 0-chain: enumerate every assignment of
// coordinate units to pair / drop / escape choices.
double oracle_flat_norm(const PolyChain& chain, const CoefficientGroup& cg,
                        const std::optional<Box>& domain) {
  struct Unit {
    Point p;
    int slot;  // 0,1: signed coordinate; 2: projective bit
    int sign;
  };
  std::vector<Unit> units;
  for (const auto& c : chain.cells()) {
    if (chain.group_kind() == GroupKind::Z2_projective) {
      if (c.mult.a & 1) units.push_back({c.a, 2, 1});
      continue;
    }
    for (int k = 0; k < std::abs(c.mult.a); ++k)
      units.push_back({c.a, 0, c.mult.a > 0 ? 1 : -1});
    for (int k = 0; k < std::abs(c.mult.b); ++k)
      units.push_back({c.a, 1, c.mult.b > 0 ? 1 : -1});
  }
  const double w = cg.kind() == GroupKind::Z2_projective
                       ? projective_generator_energy()
                       : kPi;
  auto terminal = [&](const Point& p) {
    double t = 1.0;
    if (domain) t = std::min(t, domain->dist_to_boundary(p));
    return w * t;
  };
  // Slots are independent: pairs never cross a slot, so enumerate each
  // slot separately and add the minima.
  double total = 0.0;
  for (int slot = 0; slot < 3; ++slot) {
    std::vector<Unit> su;
    for (const auto& un : units)
      if (un.slot == slot) su.push_back(un);
    const int n = int(su.size());
    if (n == 0) continue;
    double best = 1e300;
    std::vector<int> partner(n, -2);  // -2 unassigned, -1 terminal, else index
    auto rec = [&](auto&& self, int i, double cost) -> void {
      if (cost >= best) return;
      while (i < n && partner[i] != -2) ++i;
      if (i == n) {
        best = std::min(best, cost);
        return;
      }
      partner[i] = -1;
      self(self, i + 1, cost + terminal(su[i].p));
      for (int j = i + 1; j < n; ++j) {
        if (partner[j] != -2) continue;
        if (slot != 2 && su[i].sign == su[j].sign) continue;
        partner[i] = j;
        partner[j] = i;
        self(self, i + 1, cost + w * dist(su[i].p, su[j].p));
        partner[j] = -2;
      }
      partner[i] = -2;
    };
    rec(rec, 0, 0.0);
    total += best;
  }
  return total;
}

// Brute-force perfect pairing for the minimal connection.
double oracle_connection_mass(const PolyChain& bd, const CoefficientGroup& cg) {
  struct Unit {
    Point p;
    int slot;
    int sign;
  };
  std::vector<Unit> units;
  for (const auto& c : bd.cells()) {
    if (bd.group_kind() == GroupKind::Z2_projective) {
      if (c.mult.a & 1) units.push_back({c.a, 2, 1});
      continue;
    }
    for (int k = 0; k < std::abs(c.mult.a); ++k)
      units.push_back({c.a, 0, c.mult.a > 0 ? 1 : -1});
    for (int k = 0; k < std::abs(c.mult.b); ++k)
      units.push_back({c.a, 1, c.mult.b > 0 ? 1 : -1});
  }
  const double w = cg.kind() == GroupKind::Z2_projective
                       ? projective_generator_energy()
                       : kPi;
  double total = 0.0;
  for (int slot = 0; slot < 3; ++slot) {
    std::vector<Unit> su;
    for (const auto& un : units)
      if (un.slot == slot) su.push_back(un);
    const int n = int(su.size());
    if (n == 0) continue;
    double best = 1e300;
    std::vector<int> partner(n, -2);
    auto rec = [&](auto&& self, int i, double cost) -> void {
      if (cost >= best) return;
      while (i < n && partner[i] != -2) ++i;
      if (i == n) {
        best = std::min(best, cost);
        return;
      }
      for (int j = i + 1; j < n; ++j) {
        if (partner[j] != -2) continue;
        if (slot != 2 && su[i].sign == su[j].sign) continue;
        partner[i] = j;
        partner[j] = i;
        self(self, i + 1, cost + w * dist(su[i].p, su[j].p));
        partner[j] = -2;
      }
      partner[i] = -2;
    };
    rec(rec, 0, 0.0);
    total += best;
  }
  return total;
}

}  // namespace

TEST_CASE("boundary of 1-chains") {
  CoefficientGroup cg(GroupKind::Z_circle);
  PolyChain seg(1, 3, GroupKind::Z_circle);
  const Point a{0, 0, 0}, b{1, 0, 0}, c{1, 1, 0};
  seg.add_segment(a, b, GroupElement::z(2));
  PolyChain bd = seg.boundary();
  REQUIRE(bd.cells().size() == 2);
  for (const auto& cell : bd.cells()) {
    if (cell.a == b) CHECK(cell.mult == GroupElement::z(2));
    if (cell.a == a) CHECK(cell.mult == GroupElement::z(-2));
  }

  // Closed polygon telescopes to the empty boundary.
  PolyChain poly(1, 3, GroupKind::Z_circle);
  poly.add_segment(a, b, GroupElement::z(1));
  poly.add_segment(b, c, GroupElement::z(1));
  poly.add_segment(c, a, GroupElement::z(1));
  CHECK(poly.boundary().empty());

  PolyChain two(1, 3, GroupKind::Z_circle);
  two.add_segment(a, b, GroupElement::z(1));
  two.add_segment(b, c, GroupElement::z(1));
  bd = two.boundary();
  REQUIRE(bd.cells().size() == 2);
  CHECK(bd.total_class() == GroupElement::z(0));
}

TEST_CASE("mass") {
  CoefficientGroup z(GroupKind::Z_circle);
  PolyChain pts(0, 2, GroupKind::Z_circle);
  pts.add_point({0, 0, 0}, GroupElement::z(2));
  CHECK(pts.mass(z) == doctest::Approx(2 * kPi));

  PolyChain empty(0, 2, GroupKind::Z_circle);
  CHECK(empty.mass(z) == 0.0);

  CoefficientGroup t(GroupKind::ZxZ_torus);
  PolyChain seg(1, 3, GroupKind::ZxZ_torus);
  seg.add_segment({0, 0, 0}, {1, 0, 0}, GroupElement::torus(1, 1));
  CHECK(seg.mass(t) == doctest::Approx(2 * kPi));
}

TEST_CASE("flat norm examples") {
  CoefficientGroup z(GroupKind::Z_circle);
  PolyChain pair(0, 2, GroupKind::Z_circle);
  pair.add_point({0, 0, 0}, GroupElement::z(1));
  pair.add_point({1, 0, 0}, GroupElement::z(-1));
  CHECK(flat_norm_zero(pair, z) == doctest::Approx(kPi).epsilon(1e-12));

  PolyChain empty(0, 2, GroupKind::Z_circle);
  CHECK(flat_norm_zero(empty, z) == 0.0);

  // Single unit in the unit-disk bounding box: escape and drop tie at pi.
  PolyChain one(0, 2, GroupKind::Z_circle);
  one.add_point({0, 0, 0}, GroupElement::z(1));
  Box box{{-1, -1, 0}, {1, 1, 0}, 2};
  CHECK(flat_norm_zero(one, z, box) == doctest::Approx(kPi));
  // Nearer the wall, escaping wins.
  PolyChain off(0, 2, GroupKind::Z_circle);
  off.add_point({0.7, 0, 0}, GroupElement::z(1));
  CHECK(flat_norm_zero(off, z, box) == doctest::Approx(kPi * 0.3));
}

TEST_CASE("flat norm agrees with brute force") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_int_distribution<int> n_pts(1, 6), mult(-2, 2), mode(0, 1);
  for (GroupKind kind :
       {GroupKind::Z_circle, GroupKind::ZxZ_torus, GroupKind::Z2_projective}) {
    CoefficientGroup cg(kind);
    int done = 0;
    while (done < 200) {
      PolyChain chain(0, 3, kind);
      const int n = n_pts(rng);
      for (int i = 0; i < n; ++i) {
        GroupElement g = GroupElement::zero(kind);
        if (kind == GroupKind::Z2_projective) {
          g.a = mult(rng) & 1;
        } else {
          g.a = mult(rng);
          if (kind == GroupKind::ZxZ_torus) g.b = mult(rng);
        }
        chain.add_point({coord(rng), coord(rng), coord(rng)}, g);
      }
      std::optional<Box> domain;
      if (mode(rng)) domain = Box{{-1, -1, -1}, {1, 1, 1}, 3};
      const double fast = flat_norm_zero(chain, cg, domain);
      const double slow = oracle_flat_norm(chain, cg, domain);
      CHECK(std::abs(fast - slow) < 1e-9);
      ++done;
    }
  }
}

TEST_CASE("flat norm of a boundary is at most the mass") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_int_distribution<int> n_seg(1, 5), mult(-2, 2);
  CoefficientGroup cg(GroupKind::Z_circle);
  for (int t = 0; t < 100; ++t) {
    PolyChain r(1, 3, GroupKind::Z_circle);
    const int n = n_seg(rng);
    for (int i = 0; i < n; ++i) {
      const int m = mult(rng);
      if (m == 0) continue;
      r.add_segment({coord(rng), coord(rng), coord(rng)},
                    {coord(rng), coord(rng), coord(rng)}, GroupElement::z(m));
    }
    CHECK(flat_norm_zero(r.boundary(), cg) <= r.mass(cg) + 1e-9);
  }
}

TEST_CASE("intersection index") {
  // The reference solid-torus geometry: chain carried by the radius-1
  // horizontal circle, disk in the plane y = 0 centred at (2,0,0) and
  // oriented along +y.
  PolyChain circle(1, 3, GroupKind::Z_circle);
  const int segs = 64;
  for (int k = 0; k < segs; ++k) {
    // offset by half a step so no vertex sits on the test-disk plane
    const double a0 = 2 * kPi * (k + 0.5) / segs, a1 = 2 * kPi * (k + 1.5) / segs;
    circle.add_segment({std::cos(a0), std::sin(a0), 0},
                       {std::cos(a1), std::sin(a1), 0}, GroupElement::z(1));
  }
  const DiskSpec disk{{2, 0, 0}, 1.5, {0, 1, 0}};
  CHECK(intersection_index(circle, disk) == GroupElement::z(1));

  // Not linking: disk far away.
  const DiskSpec far_disk{{5, 0, 0}, 1.0, {0, 1, 0}};
  CHECK(intersection_index(circle, far_disk) == GroupElement::z(0));

  // Bilinearity in the multiplicity.
  PolyChain doubled(1, 3, GroupKind::Z_circle);
  for (const auto& c : circle.cells())
    doubled.add_segment(c.a, c.b, c.mult + c.mult);
  CHECK(intersection_index(doubled, disk) == GroupElement::z(2));

  // Invariance under subdivision.
  PolyChain fine(1, 3, GroupKind::Z_circle);
  for (const auto& c : circle.cells()) {
    const Point mid = 0.5 * (c.a + c.b);
    fine.add_segment(c.a, mid, c.mult);
    fine.add_segment(mid, c.b, c.mult);
  }
  CHECK(intersection_index(fine, disk) == GroupElement::z(1));

  // Invariance under multiplicity splitting.
  CoefficientGroup cg(GroupKind::Z_circle);
  const PolyChain split = split_multiplicities(doubled, cg, 1e-4);
  CHECK(intersection_index(split, disk) == GroupElement::z(2));

  // In-plane segments are degenerate.
  PolyChain flat(1, 3, GroupKind::Z_circle);
  flat.add_segment({1.5, 0, 0}, {2.5, 0, 0}, GroupElement::z(1));
  CHECK_THROWS_AS(intersection_index(flat, disk), Degenerate);
}

TEST_CASE("multiplicity splitting") {
  CoefficientGroup z(GroupKind::Z_circle);
  PolyChain seg(1, 3, GroupKind::Z_circle);
  seg.add_segment({0, 0, 0}, {0, 0, 1}, GroupElement::z(2));
  const PolyChain split = split_multiplicities(seg, z, 1e-3);
  REQUIRE(split.cells().size() == 2);
  for (const auto& c : split.cells()) {
    CHECK(c.mult == GroupElement::z(1));
    CHECK(std::abs(dist(c.a, c.b) - 1.0) < 1e-6);
  }
  CHECK(split.mass(z) <= seg.mass(z) * (1 + 1e-5));

  // Already generator-valued chains are untouched.
  PolyChain unit(1, 3, GroupKind::Z_circle);
  unit.add_segment({0, 0, 0}, {0, 0, 1}, GroupElement::z(1));
  CHECK(split_multiplicities(unit, z, 1e-3) == unit);

  // Torus point of multiplicity (2,0) splits into two (1,0) points.
  CoefficientGroup t(GroupKind::ZxZ_torus);
  PolyChain pt(0, 3, GroupKind::ZxZ_torus);
  pt.add_point({0, 0, 0}, GroupElement::torus(2, 0));
  const PolyChain spt = split_multiplicities(pt, t, 1e-3);
  REQUIRE(spt.cells().size() == 2);
  for (const auto& c : spt.cells()) CHECK(c.mult == GroupElement::torus(1, 0));
}

TEST_CASE("minimal connection") {
  CoefficientGroup z(GroupKind::Z_circle);
  Box box{{-2, -2, -2}, {2, 2, 2}, 3};

  PolyChain bd(0, 3, GroupKind::Z_circle);
  bd.add_point({0, 0, 0}, GroupElement::z(1));
  bd.add_point({0, 0, 1}, GroupElement::z(-1));
  const PolyChain r = minimal_connection(bd, z, box);
  REQUIRE(r.cells().size() == 1);
  CHECK(r.mass(z) == doctest::Approx(kPi));
  PolyChain rb = r.boundary();
  CHECK(rb == bd);

  // Alternating Z/2 points on a line pair adjacently.
  CoefficientGroup p2(GroupKind::Z2_projective);
  PolyChain bd2(0, 3, GroupKind::Z2_projective);
  for (int k = 0; k < 4; ++k)
    bd2.add_point({double(k), 0, 0}, GroupElement::z2(1));
  const PolyChain r2 = minimal_connection(bd2, p2, box);
  CHECK(r2.mass(p2) ==
        doctest::Approx(2.0 * projective_generator_energy()).epsilon(1e-12));
  for (const auto& c : r2.cells()) CHECK(dist(c.a, c.b) == doctest::Approx(1.0));

  PolyChain empty(0, 3, GroupKind::Z_circle);
  CHECK(minimal_connection(empty, z, box).empty());

  PolyChain bad(0, 3, GroupKind::Z_circle);
  bad.add_point({0, 0, 0}, GroupElement::z(1));
  CHECK_THROWS_AS(minimal_connection(bad, z, box), NonZeroTotalClass);
}

TEST_CASE("minimal connection beats random competitors and matches oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Box box{{-2, -2, -2}, {2, 2, 2}, 3};
  for (GroupKind kind : {GroupKind::Z_circle, GroupKind::Z2_projective}) {
    CoefficientGroup cg(kind);
    for (int t = 0; t < 25; ++t) {
      PolyChain bd(0, 3, kind);
      std::vector<Point> plus, minus;
      const int pairs = 1 + int(rng() % 4);
      for (int k = 0; k < pairs; ++k) {
        Point p{coord(rng), coord(rng), coord(rng)};
        Point q{coord(rng), coord(rng), coord(rng)};
        bd.add_point(p, kind == GroupKind::Z_circle ? GroupElement::z(1)
                                                    : GroupElement::z2(1));
        bd.add_point(q, kind == GroupKind::Z_circle ? GroupElement::z(-1)
                                                    : GroupElement::z2(1));
        plus.push_back(p);
        minus.push_back(q);
      }
      const PolyChain r = minimal_connection(bd, cg, box);
      CHECK(std::abs(r.mass(cg) - oracle_connection_mass(bd, cg)) < 1e-9);
      CHECK(r.boundary() == bd);

      // 100 random feasible pairings are never better.
      std::vector<int> perm(pairs);
      for (int k = 0; k < pairs; ++k) perm[k] = k;
      const double w = cg.kind() == GroupKind::Z2_projective
                           ? projective_generator_energy()
                           : kPi;
      for (int c = 0; c < 100; ++c) {
        std::shuffle(perm.begin(), perm.end(), rng);
        double m = 0.0;
        for (int k = 0; k < pairs; ++k) m += w * dist(plus[k], minus[perm[k]]);
        CHECK(r.mass(cg) <= m + 1e-9);
      }
    }
  }
}

TEST_CASE("chain json round trip") {
  PolyChain seg(1, 3, GroupKind::ZxZ_torus);
  seg.add_segment({0, 0, 0}, {1, 0.5, 0.25}, GroupElement::torus(1, -1));
  seg.add_segment({1, 0.5, 0.25}, {2, 0, 0}, GroupElement::torus(0, 2));
  const PolyChain back = chain_from_json(chain_to_json(seg));
  CHECK(back == seg);

  PolyChain pts(0, 2, GroupKind::Z_circle);
  pts.add_point({0.5, -0.5, 0}, GroupElement::z(3));
  CHECK(chain_from_json(chain_to_json(pts)) == pts);
}
