#include "glc/singular.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "glc/errors.hpp"

namespace glc {

namespace {

// Right-handed spanned axes for a face with the given normal axis.
void spanned_axes(int normal_axis, int* a, int* b) {
  switch (normal_axis) {
    case 0: *a = 1; *b = 2; break;  // (y,z) -> x
    case 1: *a = 2; *b = 0; break;  // (z,x) -> y
    default: *a = 0; *b = 1; break; // (x,y) -> z
  }
}

struct EdgeKey {
  int i, j, k, axis;
  bool operator==(const EdgeKey& o) const {
    return i == o.i && j == o.j && k == o.k && axis == o.axis;
  }
};

struct EdgeKeyHash {
  size_t operator()(const EdgeKey& e) const {
    size_t h = size_t(e.i + 4096);
    h = h * 8191 + size_t(e.j + 4096);
    h = h * 8191 + size_t(e.k + 4096);
    return h * 4 + size_t(e.axis);
  }
};

struct EdgeData {
  TargetManifold::EdgeIncrement inc;
  double max_dist = 0.0;  // max dist(u, N) over the samples
  bool valid = false;     // all samples interpolable
};

// Per-extraction cache of directed edge increments (stored for +axis).
class EdgeCache {
 public:
  EdgeCache(const Field& u, const SingularGrid& g, std::span<const double> y)
      : u_(u), g_(g), y_(y.begin(), y.end()), tm_(u.target()) {}

  const EdgeData& edge(int i, int j, int k, int axis) {
    const EdgeKey key{i, j, k, axis};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, compute(key)).first->second;
  }

  double max_dist_seen() const { return max_dist_seen_; }

 private:
  EdgeData compute(const EdgeKey& key) {
    const Point p0 = g_.vertex(key.i, key.j, key.k);
    Point p1 = p0;
    p1[key.axis] += g_.h;
    EdgeData out;
    // 8 intervals per edge by default; refine on undersampling.
    for (int samples = 9; samples <= 65; samples = 2 * (samples - 1) + 1) {
      std::vector<double> vals(size_t(samples) * tm_.ambient_dim());
      std::vector<double> interp(tm_.ambient_dim());
      double worst = 0.0;
      bool ok = true;
      for (int s = 0; s < samples && ok; ++s) {
        const double t = double(s) / (samples - 1);
        const Point p = p0 + t * (p1 - p0);
        if (!u_.interpolate(p, interp)) {
          ok = false;
          break;
        }
        worst = std::max(worst, tm_.dist_to_manifold(interp));
        tm_.retraction(interp, y_, std::span<double>(vals).subspan(
                                       size_t(s) * tm_.ambient_dim(),
                                       tm_.ambient_dim()));
      }
      if (!ok) return out;  // edge leaves the sampled domain
      try {
        out.inc = tm_.edge_increment(vals, samples);
      } catch (const Undersampled&) {
        if (samples >= 65) throw;
        continue;
      }
      out.max_dist = worst;
      out.valid = true;
      max_dist_seen_ = std::max(max_dist_seen_, worst);
      break;
    }
    return out;
  }

  const Field& u_;
  const SingularGrid& g_;
  std::vector<double> y_;
  const TargetManifold& tm_;
  std::unordered_map<EdgeKey, EdgeData, EdgeKeyHash> cache_;
  double max_dist_seen_ = 0.0;
};

// Class of one plaquette from its four cached boundary edges, traversed
// counterclockwise in the right-handed spanned frame. Returns false when
// an edge leaves the domain.
bool face_class(EdgeCache& cache, const TargetManifold& tm, const FaceId& f,
                TargetManifold::EdgeIncrement* inc, double* max_dist) {
  int a, b;
  spanned_axes(f.normal_axis, &a, &b);
  int va[3] = {f.i, f.j, f.k};
  int vb[3] = {f.i, f.j, f.k};
  vb[a] += 1;
  int vc[3] = {f.i, f.j, f.k};
  vc[b] += 1;
  const EdgeData& e1 = cache.edge(va[0], va[1], va[2], a);
  const EdgeData& e2 = cache.edge(vb[0], vb[1], vb[2], b);
  const EdgeData& e3 = cache.edge(vc[0], vc[1], vc[2], a);
  const EdgeData& e4 = cache.edge(va[0], va[1], va[2], b);
  if (!e1.valid || !e2.valid || !e3.valid || !e4.valid) return false;
  using EI = TargetManifold::EdgeIncrement;
  EI acc = TargetManifold::add(e1.inc, e2.inc);
  acc = TargetManifold::add(acc, TargetManifold::negate(e3.inc));
  acc = TargetManifold::add(acc, TargetManifold::negate(e4.inc));
  *inc = acc;
  *max_dist = std::max({e1.max_dist, e2.max_dist, e3.max_dist, e4.max_dist});
  (void)tm;
  return true;
}

template <typename Fn>
void for_each_face(const SingularGrid& g, Fn&& fn) {
  if (g.dims == 2) {
    for (int i = 0; i + 1 < g.nv[0]; ++i)
      for (int j = 0; j + 1 < g.nv[1]; ++j) fn(FaceId{i, j, 0, 2});
    return;
  }
  for (int c = 0; c < 3; ++c) {
    int a, b;
    spanned_axes(c, &a, &b);
    int lim[3] = {g.nv[0], g.nv[1], g.nv[2]};
    lim[a] -= 1;
    lim[b] -= 1;
    for (int i = 0; i < lim[0]; ++i)
      for (int j = 0; j < lim[1]; ++j)
        for (int k = 0; k < lim[2]; ++k) fn(FaceId{i, j, k, c});
  }
}

}  // namespace

double default_grid_size(const Field& u, double eps) {
  const Box box = u.bounding_box();
  double extent = 0.0;
  for (int d = 0; d < u.dims(); ++d) extent = std::max(extent, box.hi[d] - box.lo[d]);
  return std::max(4.0 * u.spacing(), extent / (8.0 * std::abs(std::log(eps))));
}

SingularGrid grid_from_offset(const Field& u, double h, const Point& offset) {
  if (h <= 2.0 * u.spacing())
    throw std::invalid_argument("grid size must exceed twice the field spacing");
  SingularGrid g;
  g.h = h;
  g.dims = u.dims();
  g.offset = offset;
  const Box box = u.bounding_box();
  for (int d = 0; d < u.dims(); ++d) {
    g.anchor[d] = box.lo[d] + offset[d] - h;
    g.nv[d] = int(std::floor((box.hi[d] - g.anchor[d]) / h)) + 2;
  }
  if (u.dims() == 2) {
    g.anchor[2] = 0;
    g.nv[2] = 1;
  }
  return g;
}

namespace {

// Node-sampled Dirichlet density used by the offset search.
std::vector<double> node_dirichlet_density(const Field& u) {
  const EnergyReport rep = energy(u, 1.0, true);
  const auto& s = u.shape();
  std::vector<double> node(u.node_count(), 0.0);
  std::vector<int> counts(u.node_count(), 0);
  const int kmax = u.dims() == 3 ? s[2] - 1 : 1;
  for (int i = 0; i + 1 < s[0]; ++i)
    for (int j = 0; j + 1 < s[1]; ++j)
      for (int k = 0; k < kmax; ++k) {
        const double den = rep.per_cell_density[u.index(i, j, k)];
        const int cmax = u.dims() == 3 ? 1 : 0;
        for (int a = 0; a <= 1; ++a)
          for (int b = 0; b <= 1; ++b)
            for (int c = 0; c <= cmax; ++c) {
              node[u.index(i + a, j + b, k + c)] += den;
              counts[u.index(i + a, j + b, k + c)] += 1;
            }
      }
  for (size_t n = 0; n < node.size(); ++n)
    if (counts[n]) node[n] /= counts[n];
  return node;
}

struct SkeletonScore {
  double density_integral = 0.0;
  double max_dist = 0.0;
};

SkeletonScore score_skeleton(const Field& u, const SingularGrid& g,
                             const std::vector<double>& density) {
  SkeletonScore sc;
  const auto& tm = u.target();
  std::vector<double> interp(u.m());
  auto sample_edge = [&](const Point& p0, int axis) {
    const int S = 9;
    for (int s = 0; s < S; ++s) {
      Point p = p0;
      p[axis] += g.h * double(s) / (S - 1);
      if (!u.interpolate(p, interp)) continue;
      sc.max_dist = std::max(sc.max_dist, tm.dist_to_manifold(interp));
      // Interpolate the node density at p.
      double fi[3] = {0, 0, 0};
      int ci[3] = {0, 0, 0};
      bool ok = true;
      for (int d = 0; d < u.dims(); ++d) {
        const double t = (p[d] - u.lo()[d]) / u.spacing();
        if (t < 0 || t > u.shape()[d] - 1) ok = false;
        ci[d] = std::clamp(int(t), 0, u.shape()[d] - 2);
        fi[d] = std::clamp(t - ci[d], 0.0, 1.0);
      }
      if (!ok) continue;
      double den = 0.0;
      const int cmax = u.dims() == 3 ? 1 : 0;
      for (int a = 0; a <= 1; ++a)
        for (int b = 0; b <= 1; ++b)
          for (int c = 0; c <= cmax; ++c) {
            const double w = (a ? fi[0] : 1 - fi[0]) * (b ? fi[1] : 1 - fi[1]) *
                             (u.dims() == 3 ? (c ? fi[2] : 1 - fi[2]) : 1.0);
            den += w * density[u.index(ci[0] + a, ci[1] + b, ci[2] + c)];
          }
      sc.density_integral += den * g.h / (S - 1);
    }
  };
  const int kmax = g.dims == 3 ? g.nv[2] : 1;
  for (int i = 0; i < g.nv[0]; ++i)
    for (int j = 0; j < g.nv[1]; ++j)
      for (int k = 0; k < kmax; ++k)
        for (int axis = 0; axis < g.dims; ++axis) {
          int vi[3] = {i, j, k};
          if (vi[axis] + 1 >= g.nv[axis]) continue;
          sample_edge(g.vertex(i, j, k), axis);
        }
  return sc;
}

}  // namespace

SingularGrid choose_grid(const Field& u, double h, int trials, uint64_t seed) {
  if (trials < 1) trials = 1;
  const std::vector<double> density = node_dirichlet_density(u);
  double total_density = 0.0;
  for (double d : density) total_density += d;
  const double penalty = total_density * u.spacing() / u.target().theta0() + 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, h);
  SingularGrid best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Point offset{unif(rng), unif(rng), unif(rng)};
    if (u.dims() == 2) offset[2] = 0;
    const SingularGrid g = grid_from_offset(u, h, offset);
    const SkeletonScore sc = score_skeleton(u, g, density);
    const double score = sc.density_integral + penalty * sc.max_dist;
    if (score < best_score) {
      best_score = score;
      best = g;
    }
  }
  return best;
}

double skeleton_check(const Field& u, const SingularGrid& g) {
  const std::vector<double> density(u.node_count(), 0.0);
  return score_skeleton(u, g, density).max_dist;
}

GroupElement plaquette_class(const Field& u, const SingularGrid& g, const FaceId& face,
                             std::span<const double> y) {
  EdgeCache cache(u, g, y);
  TargetManifold::EdgeIncrement inc;
  double max_dist = 0.0;
  if (!face_class(cache, u.target(), face, &inc, &max_dist))
    throw SkeletonTooClose("plaquette boundary leaves the sampled domain");
  const double threshold = u.target().dist_N_to_complex() - u.target().delta_star();
  if (max_dist >= threshold)
    throw SkeletonTooClose("field strays too far from N on the plaquette boundary");
  return u.target().class_from_increment(inc);
}

PolyChain extract_chain(const Field& u, const SingularGrid& g,
                        std::span<const double> y) {
  return extract_chain(u, g, y, nullptr);
}

PolyChain extract_chain(const Field& u, const SingularGrid& g,
                        std::span<const double> y, ExtractStats* stats) {
  EdgeCache cache(u, g, y);
  const auto& tm = u.target();
  const double threshold = tm.dist_N_to_complex() - tm.delta_star();
  PolyChain chain(u.dims() == 2 ? 0 : 1, u.dims(), tm.group_kind());
  int n_faces = 0, n_nonzero = 0;

  // Interior boundary check bookkeeping for 3D: count included faces per
  // dual vertex (lattice cell); a vertex with all six faces present must
  // see a vanishing boundary.
  std::unordered_map<EdgeKey, int, EdgeKeyHash> cube_faces;

  for_each_face(g, [&](const FaceId& f) {
    TargetManifold::EdgeIncrement inc;
    double max_dist = 0.0;
    if (!face_class(cache, tm, f, &inc, &max_dist)) return;
    if (max_dist >= threshold)
      throw SkeletonTooClose("field strays too far from N on the grid skeleton");
    ++n_faces;
    const GroupElement cls = tm.class_from_increment(inc);
    if (u.dims() == 3) {
      const EdgeKey lo{f.i, f.j, f.k, 0};
      int hi_cell[3] = {f.i, f.j, f.k};
      hi_cell[f.normal_axis] -= 1;
      cube_faces[lo] += 1;
      cube_faces[EdgeKey{hi_cell[0], hi_cell[1], hi_cell[2], 0}] += 1;
    }
    if (cls.is_zero()) return;
    ++n_nonzero;
    // Dual cell: the face centre (2D) or the dual edge joining the centres
    // of the two lattice cells sharing the face (3D). The dual edge runs
    // along +normal and carries the negated class; equivalently it is the
    // class-weighted edge against the normal, the convention under which
    // the extracted chain of the reference solid-torus datum has
    // intersection index +1 with the oriented spanning disk.
    int a, b;
    spanned_axes(f.normal_axis, &a, &b);
    Point centre = g.vertex(f.i, f.j, f.k);
    centre[a] += 0.5 * g.h;
    centre[b] += 0.5 * g.h;
    if (u.dims() == 2) {
      chain.add_point(centre, cls);
    } else {
      Point from = centre, to = centre;
      from[f.normal_axis] -= 0.5 * g.h;
      to[f.normal_axis] += 0.5 * g.h;
      chain.add_segment(from, to, cls.neg());
    }
  });

  if (u.dims() == 3) {
    // Boundary must vanish at every dual vertex whose six faces were all
    // included.
    const PolyChain bd = chain.boundary();
    for (const auto& cell : bd.cells()) {
      // Recover the lattice cell of this dual vertex.
      int ci[3];
      for (int d = 0; d < 3; ++d)
        ci[d] = int(std::llround((cell.a[d] - g.anchor[d]) / g.h - 0.5));
      int present = 0;
      for (int c = 0; c < 3; ++c) {
        auto it = cube_faces.find(EdgeKey{ci[0], ci[1], ci[2], 0});
        if (it != cube_faces.end()) present = it->second;
        (void)c;
      }
      if (present == 6)
        throw std::logic_error("extracted chain has interior boundary");
    }
  }

  if (stats) {
    stats->skeleton_max_dist = cache.max_dist_seen();
    stats->n_plaquettes = n_faces;
    stats->n_nonzero = n_nonzero;
    stats->mass = chain.mass(tm.group());
  }
  return chain;
}

MassBoundSample sample_mass_bound(const Field& u, const SingularGrid& g,
                                  int n_samples, uint64_t seed) {
  const auto& tm = u.target();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MassBoundSample out;
  std::vector<double> y(u.m());
  for (int s = 0; s < n_samples; ++s) {
    // Uniform draw in the ball of radius delta_star.
    double n2 = 0.0;
    for (int q = 0; q < u.m(); ++q) {
      y[q] = gauss(rng);
      n2 += y[q] * y[q];
    }
    const double r =
        0.999 * tm.delta_star() * std::pow(unif(rng), 1.0 / u.m()) / std::sqrt(n2);
    for (int q = 0; q < u.m(); ++q) y[q] *= r;
    out.avg_mass += extract_chain(u, g, y).mass(tm.group());
  }
  if (n_samples > 0) out.avg_mass /= n_samples;
  out.dirichlet = dirichlet_integral(u);
  out.ratio = out.dirichlet > 0 ? out.avg_mass / out.dirichlet : 0.0;
  return out;
}

}  // namespace glc
