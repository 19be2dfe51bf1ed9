#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "glc/chain.hpp"
#include "glc/geometry.hpp"
#include "glc/manifold.hpp"

namespace glc {

enum class DomainKind : uint32_t {
  FullBox = 0,
  Disk2D = 1,
  Annulus2D = 2,
  Ball3D = 3,
  SolidTorus3D = 4,
};

// Analytic domain descriptor; masks are derived from it on the grid.
struct DomainSpec {
  DomainKind kind = DomainKind::FullBox;
  double p0 = 0.0;  // disk/ball radius, annulus inner radius, torus major radius
  double p1 = 0.0;  // annulus outer radius, torus minor radius

  bool inside(const Point& x, int dims) const;
};

// Node mask states.
enum : uint8_t { kOutside = 0, kInterior = 1, kDirichlet = 2 };

// Sampled map u : Omega in R^{n+2} -> R^m on a uniform grid.
class Field {
 public:
  Field() = default;
  Field(ManifoldKind target, int dims, const std::array<int, 3>& shape, Point lo,
        double spacing, const DomainSpec& domain);

  const TargetManifold& target() const { return *target_; }
  ManifoldKind target_kind() const { return target_kind_; }
  int dims() const { return dims_; }
  int m() const { return m_; }
  double spacing() const { return spacing_; }
  const Point& lo() const { return lo_; }
  const std::array<int, 3>& shape() const { return shape_; }
  const DomainSpec& domain() const { return domain_; }
  Box bounding_box() const;

  size_t node_count() const { return values_.size() / size_t(m_); }
  size_t index(int i, int j, int k = 0) const {
    return (size_t(i) * shape_[1] + j) * shape_[2] + k;
  }
  Point position(int i, int j, int k = 0) const {
    return {lo_[0] + spacing_ * i, lo_[1] + spacing_ * j,
            dims_ == 3 ? lo_[2] + spacing_ * k : 0.0};
  }
  std::span<double> value(size_t node) {
    return {values_.data() + node * m_, size_t(m_)};
  }
  std::span<const double> value(size_t node) const {
    return {values_.data() + node * m_, size_t(m_)};
  }
  uint8_t mask(size_t node) const { return mask_[node]; }
  void set_mask(size_t node, uint8_t v) { mask_[node] = v; }
  bool is_dirichlet(size_t node) const { return mask_[node] == kDirichlet; }
  bool is_inside(size_t node) const { return mask_[node] != kOutside; }

  std::span<const double> raw_values() const { return values_; }
  std::span<double> raw_values() { return values_; }

  // Multilinear interpolation at an arbitrary point. Returns false when the
  // surrounding cell is not fully inside the domain mask.
  bool interpolate(const Point& p, std::span<double> out) const;
  // Distance from the interpolation point to the domain boundary, measured
  // through the mask (cells fully inside count as interior).
  bool cell_inside(int ci, int cj, int ck) const;

  double dist_to_mask_boundary(const Point& p) const;

  void save(const std::string& path) const;
  static Field load(const std::string& path);

 private:
  void build_mask();

  ManifoldKind target_kind_ = ManifoldKind::Circle;
  std::shared_ptr<const TargetManifold> target_;
  int dims_ = 2;
  int m_ = 2;
  std::array<int, 3> shape_ = {1, 1, 1};
  Point lo_{0, 0, 0};
  double spacing_ = 1.0;
  DomainSpec domain_;
  std::vector<double> values_;
  std::vector<uint8_t> mask_;
};

// ----------------------------------------------------------------------
// Boundary data and recovery-type constructions
// ----------------------------------------------------------------------

struct DatumSpec {
  enum class Kind { DiskDegree, SpherePoints, SolidTorus } kind = Kind::DiskDegree;
  ManifoldKind target = ManifoldKind::Circle;
  int resolution = 64;
  double box_half = 1.05;   // half-width of the grid box (x and y)
  double radius = 1.0;      // disk/ball radius
  int degree = 1;           // disk datum winding (first factor)
  int degree2 = 0;          // second torus factor
  std::vector<std::pair<Point, GroupElement>> sphere_points;
  double torus_major = 2.0;
  double torus_minor = 1.0;
};

Field make_boundary_datum(const DatumSpec& spec);

// Multivalued dipole phase at x for the oriented simplex T: the planar
// angle difference in 2D, half the signed solid angle in 3D.
double dipole_phase(const std::vector<Point>& simplex, const Point& x, int dims);

Field insert_dipole(const Field& w, const std::vector<Point>& simplex,
                    const GroupElement& sigma);

Field regularize(const Field& w, const PolyChain& singular_chain, double eps);

Field project_near_manifold(const Field& u, std::span<const double> y, double eps);

}  // namespace glc
