#pragma once

#include <optional>
#include <vector>

#include "glc/geometry.hpp"
#include "glc/group.hpp"

namespace glc {

// Axis-aligned box, the convex domain for the relative flat norm and the
// Plateau solver.
struct Box {
  Point lo{0, 0, 0};
  Point hi{0, 0, 0};
  int dim = 3;

  bool contains(const Point& p) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  double dist_to_boundary(const Point& p) const {
    double d = 1e300;
    for (int i = 0; i < dim; ++i)
      d = std::min({d, p[i] - lo[i], hi[i] - p[i]});
    return std::max(d, 0.0);
  }
};

struct ChainCell {
  Point a{0, 0, 0};
  Point b{0, 0, 0};  // unused for q = 0
  GroupElement mult;
};

// Grid-polyhedral chain of dimension 0 or 1 with group multiplicities.
// Coincident cells merge by group addition; zero multiplicities drop.
class PolyChain {
 public:
  PolyChain(int q, int ambient, GroupKind group)
      : q_(q), ambient_(ambient), group_(group) {}

  int q() const { return q_; }
  int ambient() const { return ambient_; }
  GroupKind group_kind() const { return group_; }
  const std::vector<ChainCell>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }

  void add_point(const Point& p, const GroupElement& sigma);
  void add_segment(const Point& a, const Point& b, const GroupElement& sigma);
  void add_cell(const ChainCell& cell);
  void append(const PolyChain& other);

  PolyChain boundary() const;                   // q = 1 only
  double mass(const CoefficientGroup& cg) const;
  GroupElement total_class() const;             // sum of multiplicities
  PolyChain restrict_to_box(const Box& box) const;
  PolyChain negated() const;

  bool operator==(const PolyChain& other) const;

 private:
  int q_;
  int ambient_;
  GroupKind group_;
  std::vector<ChainCell> cells_;
};

PolyChain chain_difference(const PolyChain& lhs, const PolyChain& rhs);

// Relative (box) or free-space flat norm of a 0-chain: multiplicities split
// into coordinate units, then each signed coordinate is an exact
// assignment problem between opposite units with per-unit drop or
// boundary-escape terminals.
double flat_norm_zero(const PolyChain& chain, const CoefficientGroup& cg,
                      const std::optional<Box>& domain = std::nullopt);

// Oriented planar disk used as a dual test surface.
struct DiskSpec {
  Point center{0, 0, 0};
  double radius = 1.0;
  Point normal{0, 0, 1};
};

GroupElement intersection_index(const PolyChain& chain, const DiskSpec& disk);

PolyChain split_multiplicities(const PolyChain& chain, const CoefficientGroup& cg,
                               double offset_scale);

// Mass-minimising 1-chain R with boundary bd inside a convex box; exact via
// perfect matching per generator coordinate.
PolyChain minimal_connection(const PolyChain& bd, const CoefficientGroup& cg,
                             const Box& domain);

// Mass-weighted mean distance from the cells of `chain` to the support of
// `reference`; the support-closeness diagnostic for 1-chains.
double support_distance(const PolyChain& chain, const PolyChain& reference,
                        const CoefficientGroup& cg);

}  // namespace glc
