#include "glc/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "glc/energy.hpp"
#include "glc/errors.hpp"

namespace glc {

namespace {

// Minimise mu^2/rho + (C0/eps)(1-mu)^N over [0,1]; the objective is convex,
// so the stationarity equation has a unique root.
double lambda_min(double rho, double eps, double C0, double N) {
  if (rho <= 0) return C0 / eps;
  auto value = [&](double mu) {
    return mu * mu / rho + (C0 / eps) * std::pow(1.0 - mu, N);
  };
  auto deriv = [&](double mu) {
    return 2.0 * mu / rho - (N * C0 / eps) * std::pow(1.0 - mu, N - 1.0);
  };
  if (deriv(1.0) <= 0.0) return value(1.0);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo < 1e-10 * std::max(1.0, hi)) break;
    (deriv(mid) < 0 ? lo : hi) = mid;
  }
  return value(0.5 * (lo + hi));
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(std::abs(whole), 1e-12) * rel_tol;
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double BallParams::c1() const {
  if (C1 > 0) return C1;
  // lambda at the crossing rho = C2 eps is (1/eps) * this constant.
  return lambda_min(C2, 1.0, C0, N_exp);
}

double lambda_eps(double rho, double eps, const BallParams& p) {
  if (eps <= 0) throw std::invalid_argument("lambda_eps needs eps > 0");
  return lambda_min(rho, eps, p.C0, p.N_exp);
}

double Lambda_eps(double rho, double eps, const BallParams& p) {
  if (rho <= 0) return 0.0;
  const double cap = p.c1() / eps;
  // lambda_eps is decreasing and crosses the cap exactly at rho = C2 eps.
  const double cross = p.C2 * eps;
  if (rho <= cross) return cap * rho;
  auto f = [&](double s) { return std::min(lambda_min(s, eps, p.C0, p.N_exp), cap); };
  return cap * cross + integrate(f, cross, rho, 1e-8);
}

// --------------------------------------------------------------------------
// Essential components (2D)
// --------------------------------------------------------------------------

std::vector<EssentialComponent> essential_components(const Field& u,
                                                     const BallParams& p) {
  if (u.dims() != 2)
    throw std::invalid_argument("essential components are built on 2D fields");
  const auto& tm = u.target();
  const auto& s = u.shape();
  const double theta0 = tm.theta0();

  // Nodes where the ramp s = 1 - dist/theta0 falls at or below threshold.
  std::vector<char> low(u.node_count(), 0);
  for (int i = 0; i < s[0]; ++i)
    for (int j = 0; j < s[1]; ++j) {
      const size_t id = u.index(i, j);
      if (!u.is_inside(id)) continue;
      const double ramp =
          std::clamp(1.0 - tm.dist_to_manifold(u.value(id)) / theta0, 0.0, 1.0);
      if (ramp <= p.s_threshold) low[id] = 1;
    }

  // 4-adjacency components.
  std::vector<int> comp_of(u.node_count(), -1);
  std::vector<std::vector<size_t>> comps;
  for (int i = 0; i < s[0]; ++i)
    for (int j = 0; j < s[1]; ++j) {
      const size_t seed = u.index(i, j);
      if (!low[seed] || comp_of[seed] >= 0) continue;
      const int c = int(comps.size());
      comps.emplace_back();
      std::queue<std::pair<int, int>> q;
      q.push({i, j});
      comp_of[seed] = c;
      while (!q.empty()) {
        auto [ci, cj] = q.front();
        q.pop();
        comps[c].push_back(u.index(ci, cj));
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int t = 0; t < 4; ++t) {
          const int ni = ci + di[t], nj = cj + dj[t];
          if (ni < 0 || nj < 0 || ni >= s[0] || nj >= s[1]) continue;
          const size_t nid = u.index(ni, nj);
          if (!low[nid] || comp_of[nid] >= 0) continue;
          comp_of[nid] = c;
          q.push({ni, nj});
        }
      }
    }

  // Group components into clusters that admit a common enclosing contour.
  std::vector<std::vector<int>> clusters;
  for (int c = 0; c < int(comps.size()); ++c) clusters.push_back({c});

  auto cluster_bbox = [&](const std::vector<int>& cl, int box[4]) {
    box[0] = box[1] = 1 << 30;
    box[2] = box[3] = -(1 << 30);
    for (int c : cl)
      for (size_t id : comps[c]) {
        const int i = int(id / s[1]), j = int(id % s[1]);
        box[0] = std::min(box[0], i);
        box[1] = std::min(box[1], j);
        box[2] = std::max(box[2], i);
        box[3] = std::max(box[3], j);
      }
  };

  // Ring at inflation q around a bbox; returns the blocking component (>= 0),
  // -1 on success, -2 when the ring leaves the domain.
  auto trace_ring = [&](const int box[4], int q,
                        std::vector<size_t>* ring) -> int {
    const int i0 = box[0] - q, j0 = box[1] - q, i1 = box[2] + q, j1 = box[3] + q;
    if (i0 < 0 || j0 < 0 || i1 >= s[0] || j1 >= s[1]) return -2;
    ring->clear();
    auto push = [&](int i, int j) -> int {
      const size_t id = u.index(i, j);
      if (!u.is_inside(id)) return -2;
      if (low[id]) return comp_of[id];
      ring->push_back(id);
      return -1;
    };
    for (int i = i0; i < i1; ++i)
      if (int r = push(i, j0); r != -1) return r;
    for (int j = j0; j < j1; ++j)
      if (int r = push(i1, j); r != -1) return r;
    for (int i = i1; i > i0; --i)
      if (int r = push(i, j1); r != -1) return r;
    for (int j = j1; j > j0; --j)
      if (int r = push(i0, j); r != -1) return r;
    return -1;
  };

  std::vector<EssentialComponent> out;
  std::vector<char> done(clusters.size(), 0);
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    if (done[ci]) continue;
    bool merged = true;
    std::vector<size_t> ring;
    int found_q = -1;
    while (merged) {
      merged = false;
      int box[4];
      cluster_bbox(clusters[ci], box);
      found_q = -1;
      for (int q = 2; q <= 8 && found_q < 0; ++q) {
        const int r = trace_ring(box, q, &ring);
        if (r == -1) {
          found_q = q;
        } else if (r == -2) {
          throw BoundaryTouch("component contour leaves the domain");
        } else {
          // Absorb the blocking component's cluster and retry.
          for (size_t cj = 0; cj < clusters.size(); ++cj) {
            if (cj == ci || done[cj]) continue;
            if (std::find(clusters[cj].begin(), clusters[cj].end(), r) !=
                clusters[cj].end()) {
              clusters[ci].insert(clusters[ci].end(), clusters[cj].begin(),
                                  clusters[cj].end());
              done[cj] = 1;
              merged = true;
              break;
            }
          }
          if (!merged)
            throw BoundaryTouch("could not isolate a component contour");
          break;
        }
      }
      if (!merged && found_q < 0)
        throw BoundaryTouch("no admissible contour within the inflation cap");
    }

    // Class of the cluster: homotopy class along the CCW ring.
    std::vector<double> samples(ring.size() * size_t(u.m()));
    std::vector<double> proj(u.m());
    for (size_t t = 0; t < ring.size(); ++t) {
      tm.project_to_manifold(u.value(ring[t]), proj);
      std::copy(proj.begin(), proj.end(), samples.begin() + t * u.m());
    }
    EssentialComponent ec;
    ec.cls = tm.loop_class(samples, ring.size());
    for (int c : clusters[ci])
      ec.nodes.insert(ec.nodes.end(), comps[c].begin(), comps[c].end());
    Point mean{0, 0, 0};
    for (size_t id : ec.nodes) {
      const int i = int(id / s[1]), j = int(id % s[1]);
      mean = mean + (1.0 / double(ec.nodes.size())) * u.position(i, j);
    }
    ec.center = mean;
    for (size_t id : ec.nodes) {
      const int i = int(id / s[1]), j = int(id % s[1]);
      ec.radius = std::max(ec.radius, dist(mean, u.position(i, j)));
    }
    ec.radius += 0.5 * u.spacing();
    ec.essential = !ec.cls.is_zero();
    out.push_back(std::move(ec));
    done[ci] = 1;
  }
  return out;
}

// --------------------------------------------------------------------------
// Ball construction
// --------------------------------------------------------------------------

namespace {

struct GrowingBall {
  Point center;
  double radius;
  GroupElement cls;
  double credit;
};

void merge_pass(std::vector<GrowingBall>& balls) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < balls.size() && !changed; ++i)
      for (size_t j = i + 1; j < balls.size() && !changed; ++j) {
        const double d = dist(balls[i].center, balls[j].center);
        if (d > balls[i].radius + balls[j].radius) continue;
        // Smallest enclosing ball of the two.
        GrowingBall merged;
        if (d + balls[j].radius <= balls[i].radius) {
          merged = balls[i];
        } else if (d + balls[i].radius <= balls[j].radius) {
          merged = balls[j];
        } else {
          const double R = 0.5 * (d + balls[i].radius + balls[j].radius);
          const double t = d > 0 ? (R - balls[i].radius) / d : 0.0;
          merged.center = balls[i].center + t * (balls[j].center - balls[i].center);
          merged.radius = R;
        }
        merged.cls = balls[i].cls + balls[j].cls;
        merged.credit = balls[i].credit + balls[j].credit;
        balls[i] = merged;
        balls.erase(balls.begin() + j);
        changed = true;
      }
  }
}

}  // namespace

LowerBoundCertificate ball_construction(const Field& u, double eps,
                                        const BallParams& p) {
  if (u.dims() != 2)
    throw std::invalid_argument("ball_construction certifies 2D fields");
  const auto& tm = u.target();
  const auto& cg = tm.group();

  LowerBoundCertificate cert;
  cert.total_class = GroupElement::zero(tm.group_kind());
  cert.measured_energy = energy(u, eps).total;

  // Collar width is measured against the Dirichlet band, which tracks the
  // mask boundary even for slice-carried masks.
  std::vector<Point> band;
  for (int i = 0; i < u.shape()[0]; ++i)
    for (int j = 0; j < u.shape()[1]; ++j)
      if (u.mask(u.index(i, j)) == kDirichlet) band.push_back(u.position(i, j));

  const auto comps = essential_components(u, p);
  std::vector<GrowingBall> balls;
  double collar = std::numeric_limits<double>::infinity();
  for (const auto& ec : comps) {
    if (!ec.essential) continue;
    cert.total_class = cert.total_class + ec.cls;
    const double r0 = std::max(ec.radius, eps);
    const double w = cg.norm(ec.cls);
    balls.push_back({ec.center, r0, ec.cls, w * Lambda_eps(r0 / w, eps, p)});
    for (size_t id : ec.nodes) {
      const int i = int(id / u.shape()[1]), j = int(id % u.shape()[1]);
      const Point pos = u.position(i, j);
      for (const auto& bp : band) collar = std::min(collar, dist(pos, bp));
    }
  }
  if (balls.empty()) return cert;  // bound 0, trivially sound
  cert.collar_r = collar;

  const double total_norm = cg.norm(cert.total_class);
  const double tau_denom = std::max(total_norm, cg.min_nonzero_norm());
  const double tau = p.tau > 0 ? p.tau : collar / (8.0 * tau_denom);
  cert.tau = tau;
  if (total_norm > 0 && 4.0 * tau * total_norm >= collar)
    throw NotAdmissible("parameter coupling 4 tau |hc|_* < r fails");
  if (eps * std::abs(std::log(eps)) * total_norm > p.eps0)
    throw NotAdmissible("eps too large for the datum class");

  merge_pass(balls);
  for (int guard = 0; guard < 100000; ++guard) {
    double scale = std::numeric_limits<double>::infinity();
    for (const auto& b : balls) {
      const double w = cg.norm(b.cls);
      if (w > 0) scale = std::min(scale, b.radius / w);
    }
    if (!std::isfinite(scale) || scale >= tau) break;
    const double next = std::min(scale * 1.05, tau);
    for (auto& b : balls) {
      const double w = cg.norm(b.cls);
      if (w <= 0) continue;
      const double cur = b.radius / w;
      if (cur >= next) continue;
      b.credit += w * (Lambda_eps(next, eps, p) - Lambda_eps(cur, eps, p));
      b.radius = next * w;
    }
    merge_pass(balls);
  }

  for (const auto& b : balls) {
    cert.balls.push_back({b.center, b.radius, b.cls});
    cert.certified_bound += b.credit;
  }
  return cert;
}

LowerBoundCertificate ball_construction_sliced(const Field& u, double eps, int axis,
                                               const BallParams& p) {
  if (u.dims() != 3)
    throw std::invalid_argument("sliced certification expects a 3D field");
  if (axis < 0 || axis > 2) throw std::invalid_argument("bad slice axis");

  LowerBoundCertificate cert;
  cert.total_class = GroupElement::zero(u.target().group_kind());
  cert.measured_energy = energy(u, eps).total;

  const auto& s = u.shape();
  const int a = (axis + 1) % 3, b = (axis + 2) % 3;
  for (int slice = 1; slice + 1 < s[axis]; ++slice) {
    // Copy the slice into a 2D field with the mask carried over.
    DomainSpec dom{DomainKind::FullBox, 0, 0};
    std::array<int, 3> shape2 = {s[a], s[b], 1};
    Field f2(u.target_kind(), 2, shape2, {0, 0, 0}, u.spacing(), dom);
    auto node3 = [&](int ia, int ib) {
      int idx[3];
      idx[axis] = slice;
      idx[a] = ia;
      idx[b] = ib;
      return u.index(idx[0], idx[1], idx[2]);
    };
    for (int ia = 0; ia < s[a]; ++ia)
      for (int ib = 0; ib < s[b]; ++ib) {
        const size_t src = node3(ia, ib);
        const size_t dst = f2.index(ia, ib);
        auto v = f2.value(dst);
        const auto w = u.value(src);
        std::copy(w.begin(), w.end(), v.begin());
        f2.set_mask(dst, u.is_inside(src) ? kInterior : kOutside);
      }
    // Dirichlet band within the slice.
    for (int ia = 0; ia < s[a]; ++ia)
      for (int ib = 0; ib < s[b]; ++ib) {
        const size_t id = f2.index(ia, ib);
        if (f2.mask(id) == kOutside) continue;
        bool band = ia == 0 || ib == 0 || ia == s[a] - 1 || ib == s[b] - 1;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int t = 0; t < 4 && !band; ++t)
          if (f2.mask(f2.index(ia + di[t], ib + dj[t])) == kOutside) band = true;
        if (band) f2.set_mask(id, kDirichlet);
      }
    bool has_interior = false;
    for (size_t id = 0; id < f2.node_count() && !has_interior; ++id)
      has_interior = f2.mask(id) == kInterior;
    if (!has_interior) continue;
    try {
      const LowerBoundCertificate sc = ball_construction(f2, eps, p);
      cert.certified_bound += u.spacing() * sc.certified_bound;
      for (const auto& ball : sc.balls) {
        Point c3;
        c3[axis] = u.lo()[axis] + u.spacing() * slice;
        c3[a] = u.lo()[a] + ball.center[0];
        c3[b] = u.lo()[b] + ball.center[1];
        cert.balls.push_back({c3, ball.radius, ball.cls});
      }
    } catch (const BoundaryTouch&) {
      ++cert.refused_slices;
    } catch (const NotAdmissible&) {
      ++cert.refused_slices;
    }
  }
  return cert;
}

}  // namespace glc
