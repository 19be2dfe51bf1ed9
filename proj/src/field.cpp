#include "glc/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>

#include "glc/errors.hpp"

namespace glc {

bool DomainSpec::inside(const Point& x, [[maybe_unused]] int dims) const {
  switch (kind) {
    case DomainKind::FullBox:
      return true;
    case DomainKind::Disk2D:
      return std::hypot(x[0], x[1]) <= p0;
    case DomainKind::Annulus2D: {
      const double r = std::hypot(x[0], x[1]);
      return r >= p0 && r <= p1;
    }
    case DomainKind::Ball3D:
      return norm(x) <= p0;
    case DomainKind::SolidTorus3D: {
      if (dims != 3) return false;
      const double r = std::hypot(x[0], x[1]);
      return sqr(r - p0) + sqr(x[2]) <= sqr(p1);
    }
  }
  return false;
}

// Signed analytic distance from x to the domain boundary (positive inside).
static double analytic_boundary_dist(const DomainSpec& d, const Point& x,
                                     [[maybe_unused]] int dims, const Box& box) {
  double wall = box.dist_to_boundary(x);
  switch (d.kind) {
    case DomainKind::FullBox:
      return wall;
    case DomainKind::Disk2D:
      return std::min(wall, d.p0 - std::hypot(x[0], x[1]));
    case DomainKind::Annulus2D: {
      const double r = std::hypot(x[0], x[1]);
      return std::min({wall, r - d.p0, d.p1 - r});
    }
    case DomainKind::Ball3D:
      return std::min(wall, d.p0 - norm(x));
    case DomainKind::SolidTorus3D: {
      const double r = std::hypot(x[0], x[1]);
      return std::min(wall, d.p1 - std::sqrt(sqr(r - d.p0) + sqr(x[2])));
    }
  }
  return wall;
}

Field::Field(ManifoldKind target, int dims, const std::array<int, 3>& shape, Point lo,
             double spacing, const DomainSpec& domain)
    : target_kind_(target),
      target_(std::make_shared<TargetManifold>(target)),
      dims_(dims),
      shape_(shape),
      lo_(lo),
      spacing_(spacing),
      domain_(domain) {
  if (dims_ == 2) shape_[2] = 1;
  m_ = target_->ambient_dim();
  const size_t n = size_t(shape_[0]) * shape_[1] * shape_[2];
  values_.assign(n * m_, 0.0);
  mask_.assign(n, kOutside);
  build_mask();
}

void Field::build_mask() {
  auto grid_edge = [&](int i, int j, int k) {
    if (i == 0 || i == shape_[0] - 1 || j == 0 || j == shape_[1] - 1) return true;
    return dims_ == 3 && (k == 0 || k == shape_[2] - 1);
  };
  for (int i = 0; i < shape_[0]; ++i)
    for (int j = 0; j < shape_[1]; ++j)
      for (int k = 0; k < shape_[2]; ++k)
        if (domain_.inside(position(i, j, k), dims_))
          mask_[index(i, j, k)] = kInterior;
  for (int i = 0; i < shape_[0]; ++i)
    for (int j = 0; j < shape_[1]; ++j)
      for (int k = 0; k < shape_[2]; ++k) {
        const size_t id = index(i, j, k);
        if (mask_[id] == kOutside) continue;
        bool boundary = grid_edge(i, j, k);
        const int di[6] = {1, -1, 0, 0, 0, 0};
        const int dj[6] = {0, 0, 1, -1, 0, 0};
        const int dk[6] = {0, 0, 0, 0, 1, -1};
        for (int s = 0; s < (dims_ == 3 ? 6 : 4) && !boundary; ++s)
          if (mask_[index(i + di[s], j + dj[s], k + dk[s])] == kOutside)
            boundary = true;
        if (boundary) mask_[id] = kDirichlet;
      }
}

Box Field::bounding_box() const {
  Box b;
  b.dim = dims_;
  b.lo = lo_;
  b.hi = {lo_[0] + spacing_ * (shape_[0] - 1), lo_[1] + spacing_ * (shape_[1] - 1),
          dims_ == 3 ? lo_[2] + spacing_ * (shape_[2] - 1) : 0.0};
  return b;
}

bool Field::cell_inside(int ci, int cj, int ck) const {
  const int kmax = dims_ == 3 ? 1 : 0;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= kmax; ++c)
        if (mask_[index(ci + a, cj + b, ck + c)] == kOutside) return false;
  return true;
}

bool Field::interpolate(const Point& p, std::span<double> out) const {
  double fc[3] = {0, 0, 0};
  int c[3] = {0, 0, 0};
  for (int d = 0; d < dims_; ++d) {
    const double t = (p[d] - lo_[d]) / spacing_;
    if (t < -1e-9 || t > shape_[d] - 1 + 1e-9) return false;
    int ci = int(std::floor(t));
    ci = std::clamp(ci, 0, shape_[d] - 2);
    c[d] = ci;
    fc[d] = std::clamp(t - ci, 0.0, 1.0);
  }
  if (!cell_inside(c[0], c[1], c[2])) return false;
  std::fill(out.begin(), out.end(), 0.0);
  const int kmax = dims_ == 3 ? 1 : 0;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int cc = 0; cc <= kmax; ++cc) {
        const double w = (a ? fc[0] : 1 - fc[0]) * (b ? fc[1] : 1 - fc[1]) *
                         (dims_ == 3 ? (cc ? fc[2] : 1 - fc[2]) : 1.0);
        const auto v = value(index(c[0] + a, c[1] + b, c[2] + cc));
        for (int q = 0; q < m_; ++q) out[q] += w * v[q];
      }
  return true;
}

double Field::dist_to_mask_boundary(const Point& p) const {
  return analytic_boundary_dist(domain_, p, dims_, bounding_box());
}

// ----------------------------------------------------------------------
// glf binary format
// ----------------------------------------------------------------------
namespace {
template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void Field::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write("GLCH", 4);
  put<uint32_t>(os, 1);  // version
  put<uint32_t>(os, uint32_t(target_kind_));
  put<uint32_t>(os, uint32_t(dims_));
  put<uint32_t>(os, uint32_t(m_));
  for (int d = 0; d < 3; ++d) put<uint32_t>(os, uint32_t(shape_[d]));
  put<double>(os, spacing_);
  for (int d = 0; d < 3; ++d) put<double>(os, lo_[d]);
  put<uint32_t>(os, uint32_t(domain_.kind));
  put<double>(os, domain_.p0);
  put<double>(os, domain_.p1);
  os.write(reinterpret_cast<const char*>(mask_.data()), std::streamsize(mask_.size()));
  os.write(reinterpret_cast<const char*>(values_.data()),
           std::streamsize(values_.size() * sizeof(double)));
}

Field Field::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::strncmp(magic, "GLCH", 4) != 0)
    throw std::runtime_error(path + ": not a glf field file");
  uint32_t version, tk, dims, m, sh[3], dk;
  get(is, version);
  get(is, tk);
  get(is, dims);
  get(is, m);
  for (auto& s : sh) get(is, s);
  double spacing;
  Point lo;
  get(is, spacing);
  for (int d = 0; d < 3; ++d) get(is, lo[d]);
  get(is, dk);
  DomainSpec dom;
  dom.kind = DomainKind(dk);
  get(is, dom.p0);
  get(is, dom.p1);
  Field f(ManifoldKind(tk), int(dims), {int(sh[0]), int(sh[1]), int(sh[2])}, lo,
          spacing, dom);
  if (uint32_t(f.m()) != m) throw std::runtime_error(path + ": ambient dim mismatch");
  is.read(reinterpret_cast<char*>(f.mask_.data()), std::streamsize(f.mask_.size()));
  is.read(reinterpret_cast<char*>(f.values_.data()),
          std::streamsize(f.values_.size() * sizeof(double)));
  if (!is) throw std::runtime_error(path + ": truncated field file");
  return f;
}

// ----------------------------------------------------------------------
// Boundary data
// ----------------------------------------------------------------------
namespace {

void circle_value(double angle, std::span<double> out) {
  out[0] = std::cos(angle);
  out[1] = std::sin(angle);
}

// Datum value on N for the given descriptor at boundary angle theta.
void disk_datum_value(const DatumSpec& spec, double theta, std::span<double> out) {
  switch (spec.target) {
    case ManifoldKind::Circle:
      circle_value(spec.degree * theta, out);
      break;
    case ManifoldKind::Torus:
      circle_value(spec.degree * theta, out.subspan(0, 2));
      circle_value(spec.degree2 * theta, out.subspan(2, 2));
      break;
    case ManifoldKind::ProjectivePlane: {
      const double ang = 0.5 * spec.degree * theta;
      const double n[3] = {std::cos(ang), std::sin(ang), 0.0};
      sym3::q_from_director(n, out);
      break;
    }
  }
}

// Planar polygon for a boundary dipole pair: the chord between the two
// sphere points plus a return arc held outside the ball.
std::vector<Point> boundary_pair_polygon(const Point& pp, const Point& pm, double R) {
  Point u = (1.0 / norm(pp)) * pp;
  Point w = pm - dot(pm, u) * u;
  if (norm(w) < 1e-9 * R) {
    // Nearly antipodal pair: pick any direction orthogonal to u.
    Point t = std::abs(u[0]) < 0.9 ? Point{1, 0, 0} : Point{0, 1, 0};
    w = t - dot(t, u) * u;
  }
  w = (1.0 / norm(w)) * w;
  const double phi_m = std::atan2(dot(pm, w), dot(pm, u));
  std::vector<Point> poly = {pp, pm};
  const int arc = 24;
  const double Rout = 3.0 * R;
  for (int s = 0; s <= arc; ++s) {
    const double t = phi_m + (0.0 - phi_m) * double(s) / arc;
    poly.push_back(Rout * (std::cos(t) * u + std::sin(t) * w));
  }
  return poly;
}

}  // namespace

double dipole_phase(const std::vector<Point>& simplex, const Point& x, int dims) {
  if (dims == 2) {
    const Point za = x - simplex[0];
    const Point zb = x - simplex[1];
    const double re = zb[0] * za[0] + zb[1] * za[1];
    const double im = zb[1] * za[0] - zb[0] * za[1];
    return std::atan2(im, re);
  }
  // Van Oosterom-Strackee per fan triangle; half the signed solid angle.
  double omega = 0.0;
  for (size_t t = 1; t + 1 < simplex.size(); ++t) {
    const Point a = simplex[0] - x;
    const Point b = simplex[t] - x;
    const Point c = simplex[t + 1] - x;
    const double la = norm(a), lb = norm(b), lc = norm(c);
    const double num = dot(a, cross(b, c));
    const double den =
        la * lb * lc + dot(a, b) * lc + dot(b, c) * la + dot(c, a) * lb;
    omega += 2.0 * std::atan2(num, den);
  }
  return 0.5 * omega;
}

Field make_boundary_datum(const DatumSpec& spec) {
  if (spec.resolution < 8) throw InvalidDescriptor("resolution must be at least 8");

  if (spec.kind == DatumSpec::Kind::DiskDegree) {
    if (spec.radius >= spec.box_half)
      throw InvalidDescriptor("disk radius must sit inside the box");
    DomainSpec dom{DomainKind::Disk2D, spec.radius, 0.0};
    const int n = spec.resolution;
    const double h = 2.0 * spec.box_half / (n - 1);
    Field f(spec.target, 2, {n, n, 1}, {-spec.box_half, -spec.box_half, 0}, h, dom);
    std::vector<double> val(f.m());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const size_t id = f.index(i, j);
        const Point p = f.position(i, j);
        const double theta = std::atan2(p[1], p[0]);
        const double r = std::hypot(p[0], p[1]);
        disk_datum_value(spec, theta, val);
        const double scale = f.is_dirichlet(id) ? 1.0 : std::min(r / spec.radius, 1.0);
        auto out = f.value(id);
        for (int q = 0; q < f.m(); ++q) out[q] = scale * val[q];
      }
    return f;
  }

  if (spec.kind == DatumSpec::Kind::SolidTorus) {
    if (spec.target != ManifoldKind::Circle)
      throw InvalidDescriptor("solid torus datum is defined for the circle target");
    DomainSpec dom{DomainKind::SolidTorus3D, spec.torus_major, spec.torus_minor};
    const int n = spec.resolution;
    const double L = spec.box_half;
    const double h = 2.0 * L / (n - 1);
    Field f(spec.target, 3, {n, n, n}, {-L, -L, -L}, h, dom);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const size_t id = f.index(i, j, k);
          const Point p = f.position(i, j, k);
          const double r = std::hypot(p[0], p[1]);
          double u1 = r - spec.torus_major;
          double u2 = p[2];
          if (f.is_dirichlet(id)) {
            const double s = std::hypot(u1, u2);
            if (s > 1e-12) {
              u1 /= s;
              u2 /= s;
            } else {
              u1 = 1.0;
              u2 = 0.0;
            }
          }
          auto out = f.value(id);
          out[0] = u1;
          out[1] = u2;
        }
    return f;
  }

  // SpherePoints: boundary singularities on a ball, classes summing to zero.
  if (spec.target == ManifoldKind::Torus)
    throw InvalidDescriptor("sphere-point datum supports circle and projective targets");
  GroupElement total = GroupElement::zero(
      spec.target == ManifoldKind::Circle ? GroupKind::Z_circle
                                          : GroupKind::Z2_projective);
  for (const auto& [p, s] : spec.sphere_points) total = total + s;
  if (!total.is_zero())
    throw InvalidDescriptor("sphere datum classes must sum to zero");

  const double R = spec.radius;
  std::vector<Point> plus, minus;
  for (const auto& [p, s] : spec.sphere_points) {
    const Point q = (R / norm(p)) * p;
    if (spec.target == ManifoldKind::Circle) {
      for (int k = 0; k < std::abs(s.a); ++k) (s.a > 0 ? plus : minus).push_back(q);
    } else if (s.a & 1) {
      // Z/2 units pair among themselves; alternate the roles.
      (plus.size() <= minus.size() ? plus : minus).push_back(q);
    }
  }
  if (plus.size() != minus.size())
    throw InvalidDescriptor("unbalanced singular units after decomposition");

  std::vector<std::vector<Point>> polys;
  for (size_t i = 0; i < plus.size(); ++i)
    polys.push_back(boundary_pair_polygon(plus[i], minus[i], R));

  DomainSpec dom{DomainKind::Ball3D, R, 0.0};
  const int n = spec.resolution;
  const double L = spec.box_half;
  const double h = 2.0 * L / (n - 1);
  Field f(spec.target, 3, {n, n, n}, {-L, -L, -L}, h, dom);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const size_t id = f.index(i, j, k);
        Point p = f.position(i, j, k);
        // Nudge nodes that sit exactly on a singular chord.
        for (const auto& poly : polys)
          if (dist_point_segment(p, poly[0], poly[1]) < 1e-9)
            p = p + Point{0.31 * h, 0.17 * h, 0.23 * h};
        double phase = 0.0;
        for (const auto& poly : polys) phase += dipole_phase(poly, p, 3);
        auto out = f.value(id);
        if (spec.target == ManifoldKind::Circle) {
          circle_value(phase, out);
        } else {
          const double ang = 0.5 * phase;
          const double nd[3] = {std::cos(ang), std::sin(ang), 0.0};
          sym3::q_from_director(nd, out);
        }
      }
  return f;
}

// ----------------------------------------------------------------------
// Dipole insertion
// ----------------------------------------------------------------------
namespace {

void rotate2(std::span<double> v, int off, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double x = v[off], y = v[off + 1];
  v[off] = c * x - s * y;
  v[off + 1] = s * x + c * y;
}

Point rodrigues(const Point& v, const Point& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return c * v + s * cross(axis, v) + (dot(axis, v) * (1.0 - c)) * axis;
}

}  // namespace

Field insert_dipole(const Field& w, const std::vector<Point>& simplex,
                    const GroupElement& sigma) {
  if (w.dims() == 2 && simplex.size() != 2)
    throw InvalidDescriptor("2D dipole simplex is a segment");
  if (w.dims() == 3 && simplex.size() < 3)
    throw InvalidDescriptor("3D dipole simplex is a planar polygon");
  const double margin = 3.0 * w.spacing();
  for (size_t i = 0; i < simplex.size(); ++i)
    for (int s = 0; s <= 8; ++s) {
      const Point p =
          simplex[i] + (s / 8.0) * (simplex[(i + 1) % simplex.size()] - simplex[i]);
      if (w.dist_to_mask_boundary(p) < margin)
        throw SimplexTouchesBoundary("dipole simplex within the boundary collar");
    }
  if (sigma.kind != w.target().group_kind())
    throw std::invalid_argument("dipole class kind does not match the target");

  Field out = w;
  const auto& tm = w.target();

  // Projective rotations act about a fixed axis orthogonal to the director
  // at the simplex centroid.
  Point axis{0, 0, 1};
  if (w.target_kind() == ManifoldKind::ProjectivePlane) {
    Point centroid{0, 0, 0};
    for (const auto& v : simplex) centroid = centroid + (1.0 / simplex.size()) * v;
    std::vector<double> q(w.m());
    if (!w.interpolate(centroid, q))
      throw SimplexTouchesBoundary("dipole simplex outside the sampled domain");
    double M[3][3], lam[3], V[3][3];
    sym3::vec_to_mat(q, M);
    sym3::eigen_sym3(M, lam, V);
    const Point n{V[0][0], V[1][0], V[2][0]};
    Point pick = std::abs(n[0]) < 0.9 ? Point{1, 0, 0} : Point{0, 1, 0};
    axis = cross(n, pick);
    axis = (1.0 / norm(axis)) * axis;
  }

  std::vector<double> proj(w.m());
  const size_t N = w.node_count();
  for (size_t id = 0; id < N; ++id) {
    auto v = out.value(id);
    const double d = tm.dist_to_manifold(v);
    if (d > 1e-12) {
      tm.project_to_manifold(v, proj);  // throws TooFarFromManifold if invalid
      std::copy(proj.begin(), proj.end(), v.begin());
    }
  }

  for (int i = 0; i < w.shape()[0]; ++i)
    for (int j = 0; j < w.shape()[1]; ++j)
      for (int k = 0; k < w.shape()[2]; ++k) {
        const size_t id = w.index(i, j, k);
        const Point p = w.position(i, j, k);
        // Taper to zero within the boundary collar so the datum is kept.
        const double chi =
            std::clamp(w.dist_to_mask_boundary(p) / w.spacing() / 2.0 - 0.5, 0.0, 1.0);
        if (chi == 0.0) continue;
        const double phi = dipole_phase(simplex, p, w.dims()) * chi;
        auto v = out.value(id);
        switch (w.target_kind()) {
          case ManifoldKind::Circle:
            rotate2(v, 0, sigma.a * phi);
            break;
          case ManifoldKind::Torus:
            rotate2(v, 0, sigma.a * phi);
            rotate2(v, 2, sigma.b * phi);
            break;
          case ManifoldKind::ProjectivePlane: {
            if (!(sigma.a & 1)) break;
            double M[3][3], lam[3], V[3][3];
            sym3::vec_to_mat(v, M);
            sym3::eigen_sym3(M, lam, V);
            const Point n{V[0][0], V[1][0], V[2][0]};
            const Point r = rodrigues(n, axis, 0.5 * phi);
            const double nd[3] = {r[0], r[1], r[2]};
            sym3::q_from_director(nd, v);
            break;
          }
        }
      }
  return out;
}

Field regularize(const Field& w, const PolyChain& singular_chain, double eps) {
  if (eps <= 0) throw std::invalid_argument("regularize needs eps > 0");
  Field out = w;
  for (int i = 0; i < w.shape()[0]; ++i)
    for (int j = 0; j < w.shape()[1]; ++j)
      for (int k = 0; k < w.shape()[2]; ++k) {
        const size_t id = w.index(i, j, k);
        const Point p = w.position(i, j, k);
        double d = 1e300;
        for (const auto& c : singular_chain.cells())
          d = std::min(d, singular_chain.q() == 0 ? dist(p, c.a)
                                                  : dist_point_segment(p, c.a, c.b));
        if (singular_chain.cells().empty()) d = eps;  // identity
        const double scale = std::min(d / eps, 1.0);
        auto v = out.value(id);
        for (int q = 0; q < w.m(); ++q) v[q] *= scale;
      }
  return out;
}

Field project_near_manifold(const Field& u, std::span<const double> y, double eps) {
  const auto& tm = u.target();
  double yn = 0.0;
  for (int q = 0; q < u.m(); ++q) yn += sqr(y[q]);
  if (std::sqrt(yn) >= tm.delta_star())
    throw std::invalid_argument("shift must satisfy |y| < delta_star");
  Field out = u;
  std::vector<double> shifted(u.m()), r(u.m());
  const size_t N = u.node_count();
  for (size_t id = 0; id < N; ++id) {
    auto v = out.value(id);
    for (int q = 0; q < u.m(); ++q) shifted[q] = v[q] - y[q];
    auto vout = out.value(id);
    if (tm.dist_to_complex(shifted) < 1e-9) {
      std::fill(vout.begin(), vout.end(), 0.0);
      continue;
    }
    const double xi = eps > 0 ? std::min(tm.cutoff_psi(shifted) / eps, 1.0) : 1.0;
    tm.retraction(v, y, r);
    for (int q = 0; q < u.m(); ++q) vout[q] = xi * r[q];
  }
  return out;
}

}  // namespace glc
