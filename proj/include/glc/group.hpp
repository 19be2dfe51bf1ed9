#pragma once

#include <string>
#include <vector>

namespace glc {

enum class GroupKind { Z_circle, Z2_projective, ZxZ_torus };

std::string to_string(GroupKind kind);
GroupKind group_kind_from_string(const std::string& s);

// Element of pi_1(N) for the supported targets. The payload is
//   Z_circle      : a           (winding number)
//   Z2_projective : a in {0,1}  (orientability bit)
//   ZxZ_torus     : (a, b)      (windings of the two factors)
struct GroupElement {
  GroupKind kind = GroupKind::Z_circle;
  int a = 0;
  int b = 0;

  bool is_zero() const { return a == 0 && b == 0; }
  GroupElement neg() const;
  GroupElement operator+(const GroupElement& other) const;
  GroupElement operator-(const GroupElement& other) const;
  bool operator==(const GroupElement& other) const;
  bool operator!=(const GroupElement& other) const { return !(*this == other); }

  std::string str() const;  // "d" or "d1;d2"

  static GroupElement zero(GroupKind kind) { return {kind, 0, 0}; }
  static GroupElement z(int d) { return {GroupKind::Z_circle, d, 0}; }
  static GroupElement z2(int bit);
  static GroupElement torus(int d1, int d2) { return {GroupKind::ZxZ_torus, d1, d2}; }
};

// Minimal sphere-to-target energy of the class represented by one loop on the
// projective plane; evaluated once by discrete geodesic shortening on the
// Q-tensor embedding and cached.
double projective_generator_energy();

// Normed Abelian coefficient group: E_min per class, the subadditive
// envelope |.|_* over decompositions, and the generator set S on which the
// two agree. All queries are pure; the type is freely shareable.
class CoefficientGroup {
 public:
  explicit CoefficientGroup(GroupKind kind);

  GroupKind kind() const { return kind_; }

  double e_min(const GroupElement& sigma) const;
  double norm(const GroupElement& sigma) const;
  std::vector<GroupElement> optimal_decomposition(const GroupElement& sigma) const;
  const std::vector<GroupElement>& generators() const { return generators_; }
  bool in_generators(const GroupElement& sigma) const;

  // Smallest nonzero value of |.|_* (discreteness constant).
  double min_nonzero_norm() const;

 private:
  // Both E_min and the decomposition search run on integer weights
  // (multiples of pi for Z and ZxZ, counts of the projective generator
  // energy for Z/2), so norms compare exactly against closed forms.
  long long e_min_units(const GroupElement& sigma) const;
  long long norm_units(const GroupElement& sigma,
                       std::vector<GroupElement>* decomposition) const;
  double unit_value() const;
  void check_kind(const GroupElement& sigma) const;

  GroupKind kind_;
  std::vector<GroupElement> generators_;
};

}  // namespace glc
