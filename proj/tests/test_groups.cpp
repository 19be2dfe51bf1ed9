#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "glc/group.hpp"

using namespace glc;

namespace {
constexpr double kPi = std::numbers::pi;

// Independent recursive enumeration of decompositions: parts bounded by
// E_min(part) <= E_min(sigma), count bounded by E_min(sigma) over the
// smallest nonzero E_min. Values accumulated in plain doubles.
double oracle_norm(const CoefficientGroup& cg, const GroupElement& sigma) {
  if (sigma.is_zero()) return 0.0;
  std::vector<GroupElement> candidates;
  const int bound = std::max({std::abs(sigma.a), std::abs(sigma.b), 1});
  switch (cg.kind()) {
    case GroupKind::Z_circle:
      for (int d = -bound; d <= bound; ++d)
        if (d != 0 && cg.e_min(GroupElement::z(d)) <= cg.e_min(sigma) + 1e-9)
          candidates.push_back(GroupElement::z(d));
      break;
    case GroupKind::ZxZ_torus:
      for (int a = -bound; a <= bound; ++a)
        for (int b = -bound; b <= bound; ++b)
          if ((a || b) &&
              cg.e_min(GroupElement::torus(a, b)) <= cg.e_min(sigma) + 1e-9)
            candidates.push_back(GroupElement::torus(a, b));
      break;
    case GroupKind::Z2_projective:
      candidates.push_back(GroupElement::z2(1));
      break;
  }
  double min_emin = 1e300;
  for (const auto& c : candidates) min_emin = std::min(min_emin, cg.e_min(c));
  const int max_parts = int(cg.e_min(sigma) / min_emin + 1e-9);

  double best = cg.e_min(sigma);
  auto rec = [&](auto&& self, const GroupElement& rem, double cost, size_t first,
                 int parts_left) -> void {
    if (rem.is_zero()) {
      best = std::min(best, cost);
      return;
    }
    if (parts_left == 0 || cost >= best) return;
    for (size_t i = first; i < candidates.size(); ++i)
      self(self, rem - candidates[i], cost + cg.e_min(candidates[i]), i,
           parts_left - 1);
  };
  rec(rec, sigma, 0.0, 0, max_parts);
  return best;
}

}  // namespace

TEST_CASE("e_min closed forms") {
  CoefficientGroup z(GroupKind::Z_circle);
  CHECK(z.e_min(GroupElement::z(1)) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(z.e_min(GroupElement::z(0)) == 0.0);
  CHECK(z.e_min(GroupElement::z(3)) == doctest::Approx(9 * kPi));
  CHECK(z.e_min(GroupElement::z(-3)) == z.e_min(GroupElement::z(3)));

  CoefficientGroup t(GroupKind::ZxZ_torus);
  CHECK(t.e_min(GroupElement::torus(1, 1)) == doctest::Approx(2 * kPi));
  CHECK(t.e_min(GroupElement::torus(0, 0)) == 0.0);
}

TEST_CASE("projective generator energy from the geodesic oracle") {
  // The minimising loop lifts to a half great circle of directors; in the
  // embedding it has length sqrt(3)*pi, giving energy 3*pi/4.
  const double e = projective_generator_energy();
  CHECK(e == doctest::Approx(3.0 * kPi / 4.0).epsilon(1e-4));
  CoefficientGroup g(GroupKind::Z2_projective);
  CHECK(g.e_min(GroupElement::z2(1)) == e);
  CHECK(g.e_min(GroupElement::z2(0)) == 0.0);
}

TEST_CASE("group norm closed forms and oracle agreement") {
  CoefficientGroup z(GroupKind::Z_circle);
  CHECK(z.norm(GroupElement::z(3)) == doctest::Approx(3 * kPi).epsilon(1e-15));
  CHECK(z.norm(GroupElement::z(0)) == 0.0);

  CoefficientGroup t(GroupKind::ZxZ_torus);
  CHECK(t.norm(GroupElement::torus(2, -1)) == doctest::Approx(3 * kPi));

  // Exact closed forms for every payload entry up to 4.
  for (int d = -4; d <= 4; ++d)
    CHECK(z.norm(GroupElement::z(d)) == std::abs(d) * kPi);
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b)
      CHECK(t.norm(GroupElement::torus(a, b)) == (std::abs(a) + std::abs(b)) * kPi);

  // Brute-force oracle agreement.
  for (int d = -4; d <= 4; ++d) {
    const GroupElement g = GroupElement::z(d);
    CHECK(z.norm(g) == doctest::Approx(oracle_norm(z, g)).epsilon(1e-12));
  }
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) {
      const GroupElement g = GroupElement::torus(a, b);
      CHECK(t.norm(g) == doctest::Approx(oracle_norm(t, g)).epsilon(1e-12));
    }
  CoefficientGroup p(GroupKind::Z2_projective);
  for (int bit = 0; bit <= 1; ++bit) {
    const GroupElement g = GroupElement::z2(bit);
    CHECK(p.norm(g) == doctest::Approx(oracle_norm(p, g)).epsilon(1e-12));
  }
}

TEST_CASE("triangle inequality and E_min domination") {
  for (GroupKind kind :
       {GroupKind::Z_circle, GroupKind::ZxZ_torus, GroupKind::Z2_projective}) {
    CoefficientGroup cg(kind);
    std::vector<GroupElement> all;
    if (kind == GroupKind::Z_circle) {
      for (int d = -4; d <= 4; ++d) all.push_back(GroupElement::z(d));
    } else if (kind == GroupKind::ZxZ_torus) {
      for (int a = -4; a <= 4; ++a)
        for (int b = -4; b <= 4; ++b) all.push_back(GroupElement::torus(a, b));
    } else {
      all = {GroupElement::z2(0), GroupElement::z2(1)};
    }
    for (const auto& g : all) {
      CHECK(cg.norm(g) <= cg.e_min(g) + 1e-12);
      CHECK(cg.norm(g) == cg.norm(g.neg()));
      const bool tight = std::abs(cg.norm(g) - cg.e_min(g)) < 1e-12;
      CHECK(tight == cg.in_generators(g));
      if (!g.is_zero()) CHECK(cg.norm(g) >= cg.min_nonzero_norm());
    }
    for (const auto& g1 : all)
      for (const auto& g2 : all) {
        if (g1.kind != g2.kind) continue;
        const GroupElement sum = g1 + g2;
        CHECK(cg.norm(sum) <= cg.norm(g1) + cg.norm(g2) + 1e-12);
      }
  }
}

TEST_CASE("optimal decompositions land in the generator set") {
  CoefficientGroup z(GroupKind::Z_circle);
  auto d2 = z.optimal_decomposition(GroupElement::z(2));
  REQUIRE(d2.size() == 2);
  CHECK(d2[0] == GroupElement::z(1));
  CHECK(d2[1] == GroupElement::z(1));
  CHECK(z.optimal_decomposition(GroupElement::z(0)).empty());

  CoefficientGroup t(GroupKind::ZxZ_torus);
  auto dt = t.optimal_decomposition(GroupElement::torus(2, 0));
  REQUIRE(dt.size() == 2);
  CHECK(dt[0] == GroupElement::torus(1, 0));
  CHECK(dt[1] == GroupElement::torus(1, 0));

  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) {
      const GroupElement g = GroupElement::torus(a, b);
      GroupElement sum = GroupElement::zero(GroupKind::ZxZ_torus);
      double cost = 0.0;
      for (const auto& part : t.optimal_decomposition(g)) {
        CHECK(t.in_generators(part));
        sum = sum + part;
        cost += t.norm(part);
      }
      CHECK(sum == g);
      CHECK(cost == doctest::Approx(t.norm(g)).epsilon(1e-12));
    }
}

TEST_CASE("payload and kind mismatches are rejected") {
  CoefficientGroup z(GroupKind::Z_circle);
  CHECK_THROWS_AS(z.e_min(GroupElement::z2(1)), std::invalid_argument);
  CoefficientGroup p(GroupKind::Z2_projective);
  CHECK_THROWS_AS(p.e_min(GroupElement{GroupKind::Z2_projective, 2, 0}),
                  std::invalid_argument);
}
