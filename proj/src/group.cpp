#include "glc/group.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace glc {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Z_circle: return "Z_circle";
    case GroupKind::Z2_projective: return "Z2_projective";
    case GroupKind::ZxZ_torus: return "ZxZ_torus";
  }
  return "?";
}

GroupKind group_kind_from_string(const std::string& s) {
  if (s == "Z_circle" || s == "circle") return GroupKind::Z_circle;
  if (s == "Z2_projective" || s == "projective") return GroupKind::Z2_projective;
  if (s == "ZxZ_torus" || s == "torus") return GroupKind::ZxZ_torus;
  throw std::invalid_argument("unknown group kind: " + s);
}

GroupElement GroupElement::neg() const {
  if (kind == GroupKind::Z2_projective) return *this;  // self-inverse
  return {kind, -a, -b};
}

GroupElement GroupElement::operator+(const GroupElement& other) const {
  if (kind != other.kind) throw std::invalid_argument("group kind mismatch in +");
  if (kind == GroupKind::Z2_projective) return {kind, (a + other.a) & 1, 0};
  return {kind, a + other.a, b + other.b};
}

GroupElement GroupElement::operator-(const GroupElement& other) const {
  return *this + other.neg();
}

bool GroupElement::operator==(const GroupElement& other) const {
  return kind == other.kind && a == other.a && b == other.b;
}

std::string GroupElement::str() const {
  if (kind == GroupKind::ZxZ_torus)
    return std::to_string(a) + ";" + std::to_string(b);
  return std::to_string(a);
}

GroupElement GroupElement::z2(int bit) {
  return {GroupKind::Z2_projective, bit & 1, 0};
}

// --------------------------------------------------------------------------
// Geodesic oracle for the projective-plane generator energy.
//
// Directors n and -n represent the same point of the target; the embedded
// chord length between the lines spanned by n, m is sqrt(3)*|sin(angle)|.
// A loop that reverses orientation lifts to a director path from n0 to -n0;
// midpoint smoothing with sign transport shortens it towards the minimising
// geodesic, and the class energy is L^2/(4 pi) for a loop of length L
// traversed once at constant speed.
// --------------------------------------------------------------------------
namespace {

struct Dir3 {
  double x, y, z;
};

Dir3 normalize(const Dir3& v) {
  const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return {v.x / n, v.y / n, v.z / n};
}

double ddot(const Dir3& u, const Dir3& v) {
  return u.x * v.x + u.y * v.y + u.z * v.z;
}

double chord(const Dir3& u, const Dir3& v) {
  const double c = std::clamp(std::abs(ddot(u, v)), 0.0, 1.0);
  return std::sqrt(3.0) * std::sqrt(std::max(0.0, 1.0 - c * c));
}

double loop_length(const std::vector<Dir3>& n) {
  const size_t M = n.size();
  double L = 0.0;
  for (size_t i = 0; i < M; ++i) L += chord(n[i], n[(i + 1) % M]);
  return L;
}

double shorten_generator_loop() {
  // Non-geodesic seed in the orientation-reversing class.
  size_t M = 64;
  std::vector<Dir3> n(M);
  for (size_t i = 0; i < M; ++i) {
    const double t = double(i) / double(M);
    n[i] = normalize({std::cos(kPi * t), std::sin(kPi * t),
                      0.4 * std::sin(2.0 * kPi * t)});
  }
  const size_t target_segments = 10000;
  while (true) {
    double prev = loop_length(n);
    for (int sweep = 0; sweep < 20000; ++sweep) {
      for (size_t i = 0; i < M; ++i) {
        Dir3 p = n[(i + M - 1) % M];
        Dir3 q = n[(i + 1) % M];
        if (ddot(p, n[i]) < 0) p = {-p.x, -p.y, -p.z};
        if (ddot(q, n[i]) < 0) q = {-q.x, -q.y, -q.z};
        n[i] = normalize({p.x + q.x, p.y + q.y, p.z + q.z});
      }
      const double cur = loop_length(n);
      if (std::abs(prev - cur) < 1e-13 * std::max(1.0, cur)) break;
      prev = cur;
    }
    if (M >= target_segments) break;
    // Refine by chordal midpoints (sign-transported).
    std::vector<Dir3> fine(2 * M);
    for (size_t i = 0; i < M; ++i) {
      Dir3 q = n[(i + 1) % M];
      if (ddot(q, n[i]) < 0) q = {-q.x, -q.y, -q.z};
      fine[2 * i] = n[i];
      fine[2 * i + 1] = normalize({n[i].x + q.x, n[i].y + q.y, n[i].z + q.z});
    }
    n = std::move(fine);
    M = n.size();
  }
  return loop_length(n);
}

}  // namespace

double projective_generator_energy() {
  static const double value = [] {
    const double L = shorten_generator_loop();
    return L * L / (4.0 * kPi);
  }();
  return value;
}

// --------------------------------------------------------------------------
// CoefficientGroup
// --------------------------------------------------------------------------

CoefficientGroup::CoefficientGroup(GroupKind kind) : kind_(kind) {
  switch (kind_) {
    case GroupKind::Z_circle:
      generators_ = {GroupElement::z(-1), GroupElement::z(0), GroupElement::z(1)};
      break;
    case GroupKind::Z2_projective:
      generators_ = {GroupElement::z2(0), GroupElement::z2(1)};
      break;
    case GroupKind::ZxZ_torus:
      // All classes with both windings in {-1,0,1}: equality
      // |sigma|_* = E_min(sigma) holds exactly there.
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
          generators_.push_back(GroupElement::torus(a, b));
      break;
  }
}

void CoefficientGroup::check_kind(const GroupElement& sigma) const {
  if (sigma.kind != kind_)
    throw std::invalid_argument("group element kind does not match group");
  if (kind_ == GroupKind::Z2_projective && (sigma.a < 0 || sigma.a > 1))
    throw std::invalid_argument("Z/2 payload must be 0 or 1");
}

double CoefficientGroup::unit_value() const {
  return kind_ == GroupKind::Z2_projective ? projective_generator_energy() : kPi;
}

long long CoefficientGroup::e_min_units(const GroupElement& sigma) const {
  switch (kind_) {
    case GroupKind::Z_circle:
      return 1LL * sigma.a * sigma.a;
    case GroupKind::ZxZ_torus:
      return 1LL * sigma.a * sigma.a + 1LL * sigma.b * sigma.b;
    case GroupKind::Z2_projective:
      return sigma.a ? 1 : 0;
  }
  return 0;
}

double CoefficientGroup::e_min(const GroupElement& sigma) const {
  check_kind(sigma);
  return double(e_min_units(sigma)) * unit_value();
}

// Branch-and-bound over decompositions into parts with
// E_min(part) <= E_min(sigma), parts in non-increasing candidate order so
// each multiset is visited once. The admissible remainder bound comes from
// the superquadratic growth of E_min in the winding numbers.
long long CoefficientGroup::norm_units(const GroupElement& sigma,
                                       std::vector<GroupElement>* decomposition) const {
  if (sigma.is_zero()) {
    if (decomposition) decomposition->clear();
    return 0;
  }
  const long long total = e_min_units(sigma);

  std::vector<GroupElement> candidates;
  const int bound = std::max({std::abs(sigma.a), std::abs(sigma.b), 1});
  if (kind_ == GroupKind::Z2_projective) {
    candidates.push_back(GroupElement::z2(1));
  } else if (kind_ == GroupKind::Z_circle) {
    for (int d = -bound; d <= bound; ++d)
      if (d != 0 && 1LL * d * d <= total) candidates.push_back(GroupElement::z(d));
  } else {
    for (int d1 = -bound; d1 <= bound; ++d1)
      for (int d2 = -bound; d2 <= bound; ++d2)
        if ((d1 || d2) && 1LL * d1 * d1 + 1LL * d2 * d2 <= total)
          candidates.push_back(GroupElement::torus(d1, d2));
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const GroupElement& x, const GroupElement& y) {
              return e_min_units(x) > e_min_units(y);
            });

  auto remainder_bound = [&](const GroupElement& rem) -> long long {
    switch (kind_) {
      case GroupKind::Z_circle: return std::llabs(rem.a);
      case GroupKind::ZxZ_torus: return std::llabs(rem.a) + std::llabs(rem.b);
      case GroupKind::Z2_projective: return rem.a ? 1 : 0;
    }
    return 0;
  };

  long long best = total;  // one-part decomposition is always available
  std::vector<GroupElement> best_parts = {sigma};
  std::vector<GroupElement> stack;

  auto dfs = [&](auto&& self, const GroupElement& rem, long long cost,
                 size_t first_candidate) -> void {
    if (rem.is_zero()) {
      if (cost < best) {
        best = cost;
        best_parts = stack;
      }
      return;
    }
    if (cost + remainder_bound(rem) >= best) return;
    for (size_t i = first_candidate; i < candidates.size(); ++i) {
      const long long c = e_min_units(candidates[i]);
      if (cost + c + 0 >= best) continue;
      stack.push_back(candidates[i]);
      self(self, rem - candidates[i], cost + c, i);
      stack.pop_back();
    }
  };
  dfs(dfs, sigma, 0, 0);

  if (decomposition) *decomposition = best_parts;
  return best;
}

double CoefficientGroup::norm(const GroupElement& sigma) const {
  check_kind(sigma);
  return double(norm_units(sigma, nullptr)) * unit_value();
}

std::vector<GroupElement> CoefficientGroup::optimal_decomposition(
    const GroupElement& sigma) const {
  check_kind(sigma);
  std::vector<GroupElement> parts;
  norm_units(sigma, &parts);
  // Reduce parts to generators: any part outside S splits further at equal
  // cost, so recurse until everything lies in S.
  std::vector<GroupElement> out;
  for (const auto& p : parts) {
    if (in_generators(p)) {
      if (!p.is_zero()) out.push_back(p);
    } else {
      for (const auto& g : optimal_decomposition(p)) out.push_back(g);
    }
  }
  return out;
}

bool CoefficientGroup::in_generators(const GroupElement& sigma) const {
  return std::find(generators_.begin(), generators_.end(), sigma) != generators_.end();
}

double CoefficientGroup::min_nonzero_norm() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : generators_)
    if (!g.is_zero()) best = std::min(best, norm(g));
  return best;
}

}  // namespace glc
