#include "glc/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "glc/errors.hpp"
#include "glc/geometry.hpp"

namespace glc {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
const double kSqrt6 = std::sqrt(6.0);
const double kSqrt32 = std::sqrt(1.5);  // sqrt(3/2)
}  // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Torus: return "torus";
    case ManifoldKind::ProjectivePlane: return "projective_plane";
  }
  return "?";
}

ManifoldKind manifold_kind_from_string(const std::string& s) {
  if (s == "circle") return ManifoldKind::Circle;
  if (s == "torus") return ManifoldKind::Torus;
  if (s == "projective_plane" || s == "rp2") return ManifoldKind::ProjectivePlane;
  throw std::invalid_argument("unknown manifold kind: " + s);
}

// --------------------------------------------------------------------------
// sym3 helpers
// --------------------------------------------------------------------------
namespace sym3 {

void vec_to_mat(std::span<const double> a, double M[3][3]) {
  const double d1 = a[0] / kSqrt2 + a[1] / kSqrt6;
  const double d2 = -a[0] / kSqrt2 + a[1] / kSqrt6;
  const double d3 = -2.0 * a[1] / kSqrt6;
  M[0][0] = d1;
  M[1][1] = d2;
  M[2][2] = d3;
  M[0][1] = M[1][0] = a[2] / kSqrt2;
  M[0][2] = M[2][0] = a[3] / kSqrt2;
  M[1][2] = M[2][1] = a[4] / kSqrt2;
}

void mat_to_vec(const double M[3][3], std::span<double> a) {
  a[0] = (M[0][0] - M[1][1]) / kSqrt2;
  a[1] = (M[0][0] + M[1][1] - 2.0 * M[2][2]) / kSqrt6;
  a[2] = kSqrt2 * M[0][1];
  a[3] = kSqrt2 * M[0][2];
  a[4] = kSqrt2 * M[1][2];
}

// Cyclic Jacobi; plenty for 3x3 symmetric input.
void eigen_sym3(const double M[3][3], double lambda[3], double V[3][3]) {
  double A[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      A[i][j] = M[i][j];
      V[i][j] = (i == j) ? 1.0 : 0.0;
    }
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = std::abs(A[0][1]) + std::abs(A[0][2]) + std::abs(A[1][2]);
    if (off < 1e-15) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(A[p][q]) < 1e-300) continue;
        const double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = A[k][p], akq = A[k][q];
          A[k][p] = c * akp - s * akq;
          A[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = A[p][k], aqk = A[q][k];
          A[p][k] = c * apk - s * aqk;
          A[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = V[k][p], vkq = V[k][q];
          V[k][p] = c * vkp - s * vkq;
          V[k][q] = s * vkp + c * vkq;
        }
      }
  }
  int order[3] = {0, 1, 2};
  double diag[3] = {A[0][0], A[1][1], A[2][2]};
  std::sort(order, order + 3, [&](int i, int j) { return diag[i] > diag[j]; });
  double Vs[3][3];
  for (int j = 0; j < 3; ++j) {
    lambda[j] = diag[order[j]];
    for (int i = 0; i < 3; ++i) Vs[i][j] = V[i][order[j]];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) V[i][j] = Vs[i][j];
}

void q_from_director(const double n[3], std::span<double> q) {
  double M[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      M[i][j] = kSqrt32 * (n[i] * n[j] - (i == j ? 1.0 / 3.0 : 0.0));
  mat_to_vec(M, q);
}

}  // namespace sym3

namespace {

// Leading unit eigenvector of the Q-tensor stored in q[0..4].
void leading_director(std::span<const double> q, double n[3], double* gap = nullptr,
                      double* lambda1 = nullptr) {
  double M[3][3], lam[3], V[3][3];
  sym3::vec_to_mat(q, M);
  sym3::eigen_sym3(M, lam, V);
  for (int i = 0; i < 3; ++i) n[i] = V[i][0];
  if (gap) *gap = lam[0] - lam[1];
  if (lambda1) *lambda1 = lam[0];
}

// Deterministic sign choice for a director line representative.
void canonicalize_director(double n[3]) {
  int imax = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n[i]) > std::abs(n[imax])) imax = i;
  if (n[imax] < 0)
    for (int i = 0; i < 3; ++i) n[i] = -n[i];
}

}  // namespace

// --------------------------------------------------------------------------
// TargetManifold
// --------------------------------------------------------------------------

TargetManifold::TargetManifold(ManifoldKind kind, double theta0, double delta_star)
    : kind_(kind), group_(GroupKind::Z_circle), m_(2) {
  switch (kind_) {
    case ManifoldKind::Circle:
      group_ = CoefficientGroup(GroupKind::Z_circle);
      m_ = 2;
      theta0_ = 0.5;
      lambda0_ = 1.0;
      break;
    case ManifoldKind::Torus:
      group_ = CoefficientGroup(GroupKind::ZxZ_torus);
      m_ = 4;
      theta0_ = 0.5;
      lambda0_ = 1.0;
      break;
    case ManifoldKind::ProjectivePlane:
      group_ = CoefficientGroup(GroupKind::Z2_projective);
      m_ = 5;
      theta0_ = 0.3;
      lambda0_ = 0.4;
      break;
  }
  if (theta0 > 0) theta0_ = theta0;
  delta_star_ = (delta_star > 0) ? delta_star : theta0_ / 2.0;
  if (delta_star_ >= dist_N_to_complex())
    throw std::invalid_argument("delta_star must be below dist(N, X)");
}

GroupKind TargetManifold::group_kind() const { return group_.kind(); }

double TargetManifold::embedding_radius() const {
  switch (kind_) {
    case ManifoldKind::Circle: return 1.0;
    case ManifoldKind::Torus: return kSqrt2;
    case ManifoldKind::ProjectivePlane: return 1.0;
  }
  return 1.0;
}

double TargetManifold::dist_N_to_complex() const {
  switch (kind_) {
    case ManifoldKind::Circle: return 1.0;
    case ManifoldKind::Torus: return 1.0;
    case ManifoldKind::ProjectivePlane: return std::sqrt(3.0) / 2.0;
  }
  return 1.0;
}

double TargetManifold::dist_to_manifold(std::span<const double> y) const {
  switch (kind_) {
    case ManifoldKind::Circle: {
      const double r = std::hypot(y[0], y[1]);
      return std::abs(r - 1.0);
    }
    case ManifoldKind::Torus: {
      const double r1 = std::hypot(y[0], y[1]);
      const double r2 = std::hypot(y[2], y[3]);
      return std::hypot(r1 - 1.0, r2 - 1.0);
    }
    case ManifoldKind::ProjectivePlane: {
      // Nearest point of N shares the leading eigenvector; the direct
      // difference avoids cancellation near N (the closed form
      // sqrt(|Q|^2 - sqrt6 lambda_1 + 1) loses half the digits there).
      double n[3];
      leading_director(y, n);
      double qstar[5];
      sym3::q_from_director(n, qstar);
      double d2 = 0.0;
      for (int i = 0; i < 5; ++i) d2 += sqr(y[i] - qstar[i]);
      return std::sqrt(d2);
    }
  }
  return 0.0;
}

void TargetManifold::project_to_manifold(std::span<const double> y,
                                         std::span<double> out) const {
  if (dist_to_manifold(y) >= theta0_)
    throw TooFarFromManifold("point outside the theta0 tubular neighbourhood");
  switch (kind_) {
    case ManifoldKind::Circle: {
      const double r = std::hypot(y[0], y[1]);
      out[0] = y[0] / r;
      out[1] = y[1] / r;
      break;
    }
    case ManifoldKind::Torus: {
      const double r1 = std::hypot(y[0], y[1]);
      const double r2 = std::hypot(y[2], y[3]);
      out[0] = y[0] / r1;
      out[1] = y[1] / r1;
      out[2] = y[2] / r2;
      out[3] = y[3] / r2;
      break;
    }
    case ManifoldKind::ProjectivePlane: {
      double n[3];
      leading_director(y, n);
      sym3::q_from_director(n, out);
      break;
    }
  }
}

double TargetManifold::potential(std::span<const double> y) const {
  switch (kind_) {
    case ManifoldKind::Circle: {
      const double s = y[0] * y[0] + y[1] * y[1] - 1.0;
      return s * s;
    }
    case ManifoldKind::Torus: {
      const double s1 = y[0] * y[0] + y[1] * y[1] - 1.0;
      const double s2 = y[2] * y[2] + y[3] * y[3] - 1.0;
      return s1 * s1 + s2 * s2;
    }
    case ManifoldKind::ProjectivePlane: {
      // Quartic bulk potential with minimum 0 exactly on the unit-norm
      // prolate uniaxial matrices: p^2 - sqrt6 w - p/2 + 1/2,
      // p = tr Q^2, w = tr Q^3.
      double M[3][3];
      sym3::vec_to_mat(y, M);
      double p = 0.0, w = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          p += M[i][j] * M[i][j];
          for (int k = 0; k < 3; ++k) w += M[i][j] * M[j][k] * M[k][i];
        }
      return p * p - kSqrt6 * w - 0.5 * p + 0.5;
    }
  }
  return 0.0;
}

void TargetManifold::potential_grad(std::span<const double> y,
                                    std::span<double> out) const {
  switch (kind_) {
    case ManifoldKind::Circle: {
      const double s = y[0] * y[0] + y[1] * y[1] - 1.0;
      out[0] = 4.0 * s * y[0];
      out[1] = 4.0 * s * y[1];
      break;
    }
    case ManifoldKind::Torus: {
      const double s1 = y[0] * y[0] + y[1] * y[1] - 1.0;
      const double s2 = y[2] * y[2] + y[3] * y[3] - 1.0;
      out[0] = 4.0 * s1 * y[0];
      out[1] = 4.0 * s1 * y[1];
      out[2] = 4.0 * s2 * y[2];
      out[3] = 4.0 * s2 * y[3];
      break;
    }
    case ManifoldKind::ProjectivePlane: {
      double M[3][3];
      sym3::vec_to_mat(y, M);
      double p = 0.0;
      double M2[3][3] = {};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          p += M[i][j] * M[i][j];
          for (int k = 0; k < 3; ++k) M2[i][j] += M[i][k] * M[k][j];
        }
      // G = 4 p Q - sqrt6 (3 Q^2 - p I) - Q, the traceless part of df/dQ.
      double G[3][3];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          G[i][j] = 4.0 * p * M[i][j] - kSqrt6 * (3.0 * M2[i][j] - (i == j ? p : 0.0)) -
                    M[i][j];
      sym3::mat_to_vec(G, out);
      break;
    }
  }
}

double TargetManifold::dist_to_complex(std::span<const double> z) const {
  switch (kind_) {
    case ManifoldKind::Circle:
      return std::hypot(z[0], z[1]);
    case ManifoldKind::Torus:
      return std::min(std::hypot(z[0], z[1]), std::hypot(z[2], z[3]));
    case ManifoldKind::ProjectivePlane: {
      double n[3], gap = 0.0;
      leading_director(z, n, &gap);
      return gap / kSqrt2;
    }
  }
  return 0.0;
}

double TargetManifold::cutoff_psi(std::span<const double> z) const {
  return std::min(dist_to_complex(z) / dist_N_to_complex(), 1.0);
}

void TargetManifold::retraction(std::span<const double> z, std::span<const double> y,
                                std::span<double> out) const {
  double yn = 0.0;
  for (int i = 0; i < m_; ++i) yn += y[i] * y[i];
  if (std::sqrt(yn) >= delta_star_ * (1.0 + 1e-12) && std::sqrt(yn) > 0)
    throw std::invalid_argument("retraction shift must satisfy |y| < delta_star");

  std::vector<double> shifted(m_);
  for (int i = 0; i < m_; ++i) shifted[i] = z[i] - y[i];
  if (dist_to_complex(shifted) < 1e-9)
    throw OnComplex("shifted point lies on the dual complex");

  auto raw = [&](std::span<const double> p, std::span<double> r) {
    switch (kind_) {
      case ManifoldKind::Circle: {
        const double s = std::hypot(p[0], p[1]);
        r[0] = p[0] / s;
        r[1] = p[1] / s;
        break;
      }
      case ManifoldKind::Torus: {
        const double s1 = std::hypot(p[0], p[1]);
        const double s2 = std::hypot(p[2], p[3]);
        r[0] = p[0] / s1;
        r[1] = p[1] / s1;
        r[2] = p[2] / s2;
        r[3] = p[3] / s2;
        break;
      }
      case ManifoldKind::ProjectivePlane: {
        double n[3];
        leading_director(p, n);
        sym3::q_from_director(n, r);
        break;
      }
    }
  };

  std::vector<double> target(m_);
  raw(shifted, target);
  if (yn == 0.0) {
    std::copy(target.begin(), target.end(), out.begin());
    return;
  }

  // Invert the restriction of z -> rho(z - y) to N by damped fixed point.
  std::vector<double> p(target), q(m_), step(m_);
  for (double damping : {1.0, 0.5}) {
    const int iters = damping == 1.0 ? 50 : 200;
    for (int it = 0; it < iters; ++it) {
      for (int i = 0; i < m_; ++i) step[i] = p[i] - y[i];
      raw(step, q);
      double err = 0.0;
      for (int i = 0; i < m_; ++i) err += sqr(q[i] - target[i]);
      if (err < 1e-10 * 1e-10) {
        std::copy(p.begin(), p.end(), out.begin());
        return;
      }
      for (int i = 0; i < m_; ++i) step[i] = p[i] - damping * (q[i] - target[i]);
      project_to_manifold(step, p);
    }
  }
  throw std::runtime_error("retraction correction did not converge");
}

double TargetManifold::factor_increment(std::span<const double> z1,
                                        std::span<const double> z2, int offset) const {
  const double x1 = z1[offset], y1 = z1[offset + 1];
  const double x2 = z2[offset], y2 = z2[offset + 1];
  const double inc = std::atan2(x1 * y2 - y1 * x2, x1 * x2 + y1 * y2);
  if (std::abs(inc) >= kPi / 2.0)
    throw Undersampled("phase gap between consecutive samples exceeds pi/2");
  return inc;
}

TargetManifold::EdgeIncrement TargetManifold::edge_increment(
    std::span<const double> samples, size_t count) const {
  EdgeIncrement acc;
  for (size_t i = 0; i + 1 < count; ++i) {
    std::span<const double> u = samples.subspan(i * m_, m_);
    std::span<const double> v = samples.subspan((i + 1) * m_, m_);
    switch (kind_) {
      case ManifoldKind::Circle:
        acc.phase1 += factor_increment(u, v, 0);
        break;
      case ManifoldKind::Torus:
        acc.phase1 += factor_increment(u, v, 0);
        acc.phase2 += factor_increment(u, v, 2);
        break;
      case ManifoldKind::ProjectivePlane: {
        double nu[3], nv[3];
        leading_director(u, nu);
        leading_director(v, nv);
        canonicalize_director(nu);
        canonicalize_director(nv);
        const double d = nu[0] * nv[0] + nu[1] * nv[1] + nu[2] * nv[2];
        if (std::abs(d) < 1e-6)
          throw Undersampled("director gap between consecutive samples is near pi/2");
        if (d < 0) acc.bit ^= 1;
        break;
      }
    }
  }
  return acc;
}

TargetManifold::EdgeIncrement TargetManifold::add(const EdgeIncrement& u,
                                                  const EdgeIncrement& v) {
  return {u.phase1 + v.phase1, u.phase2 + v.phase2, u.bit ^ v.bit};
}

TargetManifold::EdgeIncrement TargetManifold::negate(const EdgeIncrement& u) {
  return {-u.phase1, -u.phase2, u.bit};
}

GroupElement TargetManifold::class_from_increment(const EdgeIncrement& inc) const {
  auto wind = [](double phase) {
    const double w = phase / (2.0 * kPi);
    const double r = std::round(w);
    if (std::abs(w - r) > 0.25)
      throw std::runtime_error("winding sum is far from an integer");
    return int(r);
  };
  switch (kind_) {
    case ManifoldKind::Circle:
      return GroupElement::z(wind(inc.phase1));
    case ManifoldKind::Torus:
      return GroupElement::torus(wind(inc.phase1), wind(inc.phase2));
    case ManifoldKind::ProjectivePlane:
      return GroupElement::z2(inc.bit);
  }
  return GroupElement::zero(group_kind());
}

GroupElement TargetManifold::loop_class(std::span<const double> samples,
                                        size_t count) const {
  if (count < 3) throw Undersampled("a loop needs at least 3 samples");
  EdgeIncrement acc = edge_increment(samples, count);
  // Closing edge back to the first sample.
  std::vector<double> pair(2 * m_);
  std::copy_n(samples.begin() + (count - 1) * m_, m_, pair.begin());
  std::copy_n(samples.begin(), m_, pair.begin() + m_);
  acc = add(acc, edge_increment(pair, 2));
  return class_from_increment(acc);
}

}  // namespace glc
