#include "glc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "glc/errors.hpp"

namespace glc {

namespace {

using Key = std::array<double, 6>;

// Canonical segment key: lexicographically smaller endpoint first; the flag
// reports whether the orientation was flipped.
Key segment_key(const Point& a, const Point& b, bool* flipped) {
  const bool flip = std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  *flipped = flip;
  const Point& lo = flip ? b : a;
  const Point& hi = flip ? a : b;
  return {lo[0], lo[1], lo[2], hi[0], hi[1], hi[2]};
}

}  // namespace

void PolyChain::add_point(const Point& p, const GroupElement& sigma) {
  if (q_ != 0) throw std::logic_error("add_point on a 1-chain");
  if (sigma.is_zero()) return;
  for (auto& c : cells_) {
    if (c.a == p) {
      c.mult = c.mult + sigma;
      if (c.mult.is_zero()) {
        c = cells_.back();
        cells_.pop_back();
      }
      return;
    }
  }
  cells_.push_back({p, {0, 0, 0}, sigma});
}

void PolyChain::add_segment(const Point& a, const Point& b, const GroupElement& sigma) {
  if (q_ != 1) throw std::logic_error("add_segment on a 0-chain");
  if (sigma.is_zero() || a == b) return;
  bool flipped = false;
  segment_key(a, b, &flipped);
  const Point ca = flipped ? b : a;
  const Point cb = flipped ? a : b;
  const GroupElement cm = flipped ? sigma.neg() : sigma;
  for (auto& c : cells_) {
    if (c.a == ca && c.b == cb) {
      c.mult = c.mult + cm;
      if (c.mult.is_zero()) {
        c = cells_.back();
        cells_.pop_back();
      }
      return;
    }
  }
  cells_.push_back({ca, cb, cm});
}

void PolyChain::add_cell(const ChainCell& cell) {
  if (q_ == 0)
    add_point(cell.a, cell.mult);
  else
    add_segment(cell.a, cell.b, cell.mult);
}

void PolyChain::append(const PolyChain& other) {
  for (const auto& c : other.cells_) add_cell(c);
}

PolyChain PolyChain::boundary() const {
  if (q_ != 1) throw std::logic_error("boundary defined for 1-chains only");
  PolyChain bd(0, ambient_, group_);
  for (const auto& c : cells_) {
    bd.add_point(c.b, c.mult);
    bd.add_point(c.a, c.mult.neg());
  }
  return bd;
}

double PolyChain::mass(const CoefficientGroup& cg) const {
  double total = 0.0;
  for (const auto& c : cells_) {
    const double measure = (q_ == 0) ? 1.0 : dist(c.a, c.b);
    total += cg.norm(c.mult) * measure;
  }
  return total;
}

GroupElement PolyChain::total_class() const {
  GroupElement sum = GroupElement::zero(group_);
  for (const auto& c : cells_) sum = sum + c.mult;
  return sum;
}

PolyChain PolyChain::restrict_to_box(const Box& box) const {
  PolyChain out(q_, ambient_, group_);
  for (const auto& c : cells_) {
    if (q_ == 0) {
      if (box.contains(c.a)) out.add_point(c.a, c.mult);
      continue;
    }
    // Clip the segment to the box.
    double t0 = 0.0, t1 = 1.0;
    bool keep = true;
    for (int i = 0; i < box.dim && keep; ++i) {
      const double d = c.b[i] - c.a[i];
      if (std::abs(d) < 1e-300) {
        keep = c.a[i] >= box.lo[i] && c.a[i] <= box.hi[i];
        continue;
      }
      double ta = (box.lo[i] - c.a[i]) / d;
      double tb = (box.hi[i] - c.a[i]) / d;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      keep = t0 <= t1;
    }
    if (keep && t1 > t0)
      out.add_segment(c.a + t0 * (c.b - c.a), c.a + t1 * (c.b - c.a), c.mult);
  }
  return out;
}

PolyChain PolyChain::negated() const {
  PolyChain out(q_, ambient_, group_);
  for (const auto& c : cells_) out.add_cell({c.a, c.b, c.mult.neg()});
  return out;
}

bool PolyChain::operator==(const PolyChain& other) const {
  if (q_ != other.q_ || group_ != other.group_) return false;
  if (cells_.size() != other.cells_.size()) return false;
  auto sorted = [](const std::vector<ChainCell>& cs) {
    std::vector<ChainCell> v = cs;
    std::sort(v.begin(), v.end(), [](const ChainCell& x, const ChainCell& y) {
      if (x.a != y.a) return x.a < y.a;
      return x.b < y.b;
    });
    return v;
  };
  const auto lhs = sorted(cells_), rhs = sorted(other.cells_);
  for (size_t i = 0; i < lhs.size(); ++i)
    if (lhs[i].a != rhs[i].a || lhs[i].b != rhs[i].b || lhs[i].mult != rhs[i].mult)
      return false;
  return true;
}

PolyChain chain_difference(const PolyChain& lhs, const PolyChain& rhs) {
  PolyChain out = lhs;
  out.append(rhs.negated());
  return out;
}

// --------------------------------------------------------------------------
// Exact assignment solvers
// --------------------------------------------------------------------------
namespace {

constexpr double kInf = 1e15;

// O(n^3) Hungarian algorithm on a square cost matrix.
double hungarian(const std::vector<std::vector<double>>& a) {
  const int n = int(a.size());
  if (n == 0) return 0.0;
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += a[p[j] - 1][j - 1];
  return total;
}

// Hungarian with recovered row->column assignment.
std::vector<int> hungarian_assignment(const std::vector<std::vector<double>>& a) {
  const int n = int(a.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

// Min-cost pairing over a single set where every element may be paired with
// any other or sent to its terminal; exact subset DP.
double pair_or_drop_dp(const std::vector<Point>& pts,
                       const std::vector<double>& terminal,
                       std::vector<std::pair<int, int>>* pairs) {
  const int n = int(pts.size());
  if (n == 0) return 0.0;
  if (n > 24) throw std::runtime_error("subset matching limited to 24 units");
  const size_t full = size_t(1) << n;
  std::vector<double> dp(full, 0.0);
  std::vector<int> choice(full, -2);
  for (size_t mask = 1; mask < full; ++mask) {
    int i = 0;
    while (!(mask >> i & 1)) ++i;
    double best = dp[mask & ~(size_t(1) << i)] + terminal[i];
    int arg = -1;
    for (int j = i + 1; j < n; ++j) {
      if (!(mask >> j & 1)) continue;
      const double cand =
          dp[mask & ~(size_t(1) << i) & ~(size_t(1) << j)] + dist(pts[i], pts[j]);
      if (cand < best) {
        best = cand;
        arg = j;
      }
    }
    dp[mask] = best;
    choice[mask] = arg;
  }
  if (pairs) {
    pairs->clear();
    size_t mask = full - 1;
    while (mask) {
      int i = 0;
      while (!(mask >> i & 1)) ++i;
      const int j = choice[mask];
      mask &= ~(size_t(1) << i);
      if (j >= 0) {
        pairs->push_back({i, j});
        mask &= ~(size_t(1) << j);
      }
    }
  }
  return dp[full - 1];
}

// Unit decomposition of a 0-chain into signed coordinate units. Slot 0 is
// the first (or only) integer coordinate, slot 1 the second torus factor;
// the projective bit goes to its own unsigned list.
struct UnitSplit {
  std::vector<Point> pos[2], neg[2];
  std::vector<Point> bits;
};

UnitSplit split_units(const PolyChain& chain) {
  UnitSplit s;
  for (const auto& c : chain.cells()) {
    if (chain.group_kind() == GroupKind::Z2_projective) {
      if (c.mult.a & 1) s.bits.push_back(c.a);
      continue;
    }
    for (int k = 0; k < std::abs(c.mult.a); ++k)
      (c.mult.a > 0 ? s.pos[0] : s.neg[0]).push_back(c.a);
    for (int k = 0; k < std::abs(c.mult.b); ++k)
      (c.mult.b > 0 ? s.pos[1] : s.neg[1]).push_back(c.a);
  }
  return s;
}

// Assignment between opposite units with optional terminals. terminal[i]
// empty means pairing is mandatory (Plateau mode).
double signed_transport(const std::vector<Point>& pos, const std::vector<Point>& neg,
                        bool with_terminals, const std::vector<double>& pos_term,
                        const std::vector<double>& neg_term,
                        std::vector<std::pair<int, int>>* pairs) {
  const int P = int(pos.size()), Q = int(neg.size());
  if (P == 0 && Q == 0) return 0.0;
  if (!with_terminals && P != Q)
    throw std::logic_error("perfect transport needs balanced units");
  const int n = with_terminals ? P + Q : P;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, kInf));
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < Q; ++j) a[i][j] = dist(pos[i], neg[j]);
  if (with_terminals) {
    for (int i = 0; i < P; ++i) a[i][Q + i] = pos_term[i];
    for (int j = 0; j < Q; ++j) a[P + j][j] = neg_term[j];
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < Q; ++j) a[P + j][Q + i] = 0.0;
  }
  if (!pairs) return hungarian(a);
  const auto match = hungarian_assignment(a);
  double total = 0.0;
  pairs->clear();
  for (int i = 0; i < n; ++i) {
    total += a[i][match[i]];
    if (i < P && match[i] < Q) pairs->push_back({i, match[i]});
  }
  return total;
}

}  // namespace

double flat_norm_zero(const PolyChain& chain, const CoefficientGroup& cg,
                      const std::optional<Box>& domain) {
  if (chain.q() != 0) throw std::logic_error("flat_norm_zero expects a 0-chain");
  const UnitSplit s = split_units(chain);

  auto terminal = [&](const Point& p) {
    double t = 1.0;  // dropping one unit costs its norm, i.e. weight * 1
    if (domain) t = std::min(t, domain->dist_to_boundary(p));
    return t;
  };

  double total = 0.0;
  const double pi_w = cg.kind() == GroupKind::Z2_projective
                          ? projective_generator_energy()
                          : std::numbers::pi;
  for (int slot = 0; slot < 2; ++slot) {
    if (s.pos[slot].empty() && s.neg[slot].empty()) continue;
    std::vector<double> pt, nt;
    for (const auto& p : s.pos[slot]) pt.push_back(terminal(p));
    for (const auto& p : s.neg[slot]) nt.push_back(terminal(p));
    total += pi_w * signed_transport(s.pos[slot], s.neg[slot], true, pt, nt, nullptr);
  }
  if (!s.bits.empty()) {
    std::vector<double> term;
    for (const auto& p : s.bits) term.push_back(terminal(p));
    total += pi_w * pair_or_drop_dp(s.bits, term, nullptr);
  }
  return total;
}

GroupElement intersection_index(const PolyChain& chain, const DiskSpec& disk) {
  if (chain.q() != 1) throw std::logic_error("intersection_index expects a 1-chain");
  const double nn = norm(disk.normal);
  const Point n = (1.0 / nn) * disk.normal;
  GroupElement total = GroupElement::zero(chain.group_kind());
  for (const auto& c : chain.cells()) {
    const double sa = dot(c.a - disk.center, n);
    const double sb = dot(c.b - disk.center, n);
    if (std::abs(sa) < 1e-12 && std::abs(sb) < 1e-12)
      throw Degenerate("segment lies in the disk plane");
    if (sa == 0.0 || sb == 0.0)
      throw Degenerate("segment endpoint on the disk plane; perturb the disk");
    if ((sa < 0) == (sb < 0)) continue;
    const double t = sa / (sa - sb);
    const Point x = c.a + t * (c.b - c.a);
    if (dist(x, disk.center) >= disk.radius) continue;
    total = total + (sb > 0 ? c.mult : c.mult.neg());
  }
  return total;
}

PolyChain split_multiplicities(const PolyChain& chain, const CoefficientGroup& cg,
                               double offset_scale) {
  PolyChain out(chain.q(), chain.ambient(), chain.group_kind());
  for (const auto& c : chain.cells()) {
    if (cg.in_generators(c.mult)) {
      out.add_cell(c);
      continue;
    }
    const auto parts = cg.optimal_decomposition(c.mult);
    const int k = int(parts.size());
    // Offset direction: normal to the segment, or a fixed axis for points.
    Point dir{1, 0, 0};
    if (chain.q() == 1) {
      const Point t = c.b - c.a;
      Point ref{0, 0, 1};
      if (chain.ambient() == 2) {
        dir = {-t[1], t[0], 0};
      } else {
        if (std::abs(t[2]) > 0.9 * norm(t)) ref = {1, 0, 0};
        dir = cross(t, ref);
      }
      dir = (1.0 / norm(dir)) * dir;
    }
    const double step = (k > 1) ? offset_scale / double(k - 1) : 0.0;
    for (int i = 0; i < k; ++i) {
      const double off = (i - 0.5 * (k - 1)) * step;
      const Point shift = off * dir;
      if (chain.q() == 0)
        out.add_point(c.a + shift, parts[i]);
      else
        out.add_segment(c.a + shift, c.b + shift, parts[i]);
    }
  }
  return out;
}

PolyChain minimal_connection(const PolyChain& bd, [[maybe_unused]] const CoefficientGroup& cg,
                             const Box& domain) {
  if (bd.q() != 0) throw std::logic_error("minimal_connection expects a 0-chain");
  if (!bd.total_class().is_zero())
    throw NonZeroTotalClass("boundary multiplicities must sum to zero");
  (void)domain;  // straight segments stay inside a convex box

  PolyChain out(1, bd.ambient(), bd.group_kind());
  const UnitSplit s = split_units(bd);
  for (int slot = 0; slot < 2; ++slot) {
    if (s.pos[slot].empty()) continue;
    std::vector<std::pair<int, int>> pairs;
    signed_transport(s.pos[slot], s.neg[slot], false, {}, {}, &pairs);
    const GroupElement unit = (bd.group_kind() == GroupKind::Z_circle)
                                  ? GroupElement::z(1)
                                  : GroupElement::torus(slot == 0, slot == 1);
    for (const auto& [i, j] : pairs)
      out.add_segment(s.neg[slot][j], s.pos[slot][i], unit);
  }
  if (!s.bits.empty()) {
    if (s.bits.size() % 2)
      throw NonZeroTotalClass("odd number of projective units");
    std::vector<double> term(s.bits.size(), kInf);
    std::vector<std::pair<int, int>> pairs;
    pair_or_drop_dp(s.bits, term, &pairs);
    for (const auto& [i, j] : pairs)
      out.add_segment(s.bits[i], s.bits[j], GroupElement::z2(1));
  }
  return out;
}

double support_distance(const PolyChain& chain, const PolyChain& reference,
                        const CoefficientGroup& cg) {
  if (chain.empty()) return 0.0;
  auto dist_to_ref = [&](const Point& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : reference.cells())
      best = std::min(best, reference.q() == 0 ? dist(p, r.a)
                                               : dist_point_segment(p, r.a, r.b));
    return best;
  };
  double wsum = 0.0, acc = 0.0;
  for (const auto& c : chain.cells()) {
    const double w =
        cg.norm(c.mult) * (chain.q() == 0 ? 1.0 : dist(c.a, c.b));
    const Point rep = chain.q() == 0 ? c.a : 0.5 * (c.a + c.b);
    acc += w * dist_to_ref(rep);
    wsum += w;
  }
  return wsum > 0 ? acc / wsum : 0.0;
}

}  // namespace glc
