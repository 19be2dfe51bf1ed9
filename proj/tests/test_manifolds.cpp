#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "glc/errors.hpp"
#include "glc/geometry.hpp"
#include "glc/manifold.hpp"

using namespace glc;

namespace {
constexpr double kPi = std::numbers::pi;

// Analytic eigenvalues of a symmetric 3x3 matrix via the trigonometric
// solution of the characteristic cubic; independent of the Jacobi path.
void cardano_eigenvalues(const double M[3][3], double lam[3]) {
  const double p1 = M[0][1] * M[0][1] + M[0][2] * M[0][2] + M[1][2] * M[1][2];
  const double q = (M[0][0] + M[1][1] + M[2][2]) / 3.0;
  const double p2 = (M[0][0] - q) * (M[0][0] - q) + (M[1][1] - q) * (M[1][1] - q) +
                    (M[2][2] - q) * (M[2][2] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p < 1e-14) {
    lam[0] = lam[1] = lam[2] = q;
    return;
  }
  double B[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) B[i][j] = (M[i][j] - (i == j ? q : 0.0)) / p;
  const double detB =
      B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1]) -
      B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0]) +
      B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]);
  const double phi = std::acos(std::clamp(detB / 2.0, -1.0, 1.0)) / 3.0;
  lam[0] = q + 2.0 * p * std::cos(phi);
  lam[2] = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
  lam[1] = 3.0 * q - lam[0] - lam[2];
  if (lam[1] < lam[2]) std::swap(lam[1], lam[2]);
  if (lam[0] < lam[1]) std::swap(lam[0], lam[1]);
  if (lam[1] < lam[2]) std::swap(lam[1], lam[2]);
}

std::vector<double> random_ambient(const TargetManifold& tm, std::mt19937_64& rng,
                                   double scale) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  std::vector<double> y(tm.ambient_dim());
  for (auto& v : y) v = unif(rng);
  return y;
}

}  // namespace

TEST_CASE("distance to manifold") {
  TargetManifold circle(ManifoldKind::Circle);
  CHECK(circle.dist_to_manifold(std::vector<double>{2, 0}) == doctest::Approx(1.0));
  CHECK(circle.dist_to_manifold(std::vector<double>{0, 0}) == doctest::Approx(1.0));

  TargetManifold rp2(ManifoldKind::ProjectivePlane);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const auto y = random_ambient(rp2, rng, 1.2);
    double M[3][3], lam[3];
    sym3::vec_to_mat(y, M);
    cardano_eigenvalues(M, lam);
    double q2 = 0.0;
    for (double v : y) q2 += v * v;
    const double expected =
        std::sqrt(std::max(0.0, q2 - std::sqrt(6.0) * lam[0] + 1.0));
    CHECK(std::abs(rp2.dist_to_manifold(y) - expected) <
          1e-10 * std::max(1.0, expected));
  }
}

TEST_CASE("projection onto the target") {
  TargetManifold circle(ManifoldKind::Circle);
  std::vector<double> out(2);
  circle.project_to_manifold(std::vector<double>{1.2, 0}, out);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(0.0));
  CHECK_THROWS_AS(circle.project_to_manifold(std::vector<double>{0, 0}, out),
                  TooFarFromManifold);

  TargetManifold torus(ManifoldKind::Torus);
  std::vector<double> out4(4);
  torus.project_to_manifold(std::vector<double>{1.2, 0, 0, 0.8}, out4);
  CHECK(out4[0] == doctest::Approx(1.0));
  CHECK(out4[3] == doctest::Approx(1.0));

  TargetManifold rp2(ManifoldKind::ProjectivePlane);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> q(5), p(5);
    // Sample near the manifold so the projection is defined.
    const double n0[3] = {std::cos(0.1 * t), std::sin(0.1 * t), 0.3};
    double nn = std::sqrt(n0[0] * n0[0] + n0[1] * n0[1] + n0[2] * n0[2]);
    const double nu[3] = {n0[0] / nn, n0[1] / nn, n0[2] / nn};
    sym3::q_from_director(nu, q);
    std::uniform_real_distribution<double> unif(-0.05, 0.05);
    for (auto& v : q) v += unif(rng);
    rp2.project_to_manifold(q, p);
    CHECK(rp2.dist_to_manifold(p) < 1e-12);
    // The projection minimises distance among sampled competitors.
    const double d0 = std::sqrt(
        sqr(q[0] - p[0]) + sqr(q[1] - p[1]) + sqr(q[2] - p[2]) + sqr(q[3] - p[3]) +
        sqr(q[4] - p[4]));
    for (int s = 0; s < 40; ++s) {
      const double a = 0.15 * s, b = 0.37 * s;
      const double nc[3] = {std::cos(a) * std::cos(b), std::cos(a) * std::sin(b),
                            std::sin(a)};
      std::vector<double> cand(5);
      sym3::q_from_director(nc, cand);
      double dc = 0.0;
      for (int i = 0; i < 5; ++i) dc += sqr(q[i] - cand[i]);
      CHECK(d0 <= std::sqrt(dc) + 1e-9);
    }
  }
}

TEST_CASE("potential values and coercivity") {
  TargetManifold circle(ManifoldKind::Circle);
  CHECK(circle.potential(std::vector<double>{0, 0}) == doctest::Approx(1.0));
  CHECK(circle.potential(std::vector<double>{1, 0}) == doctest::Approx(0.0));

  std::mt19937_64 rng(3);
  for (ManifoldKind kind :
       {ManifoldKind::Circle, ManifoldKind::Torus, ManifoldKind::ProjectivePlane}) {
    TargetManifold tm(kind);
    const int samples = kind == ManifoldKind::Circle ? 100000 : 20000;
    for (int t = 0; t < samples; ++t) {
      const auto y = random_ambient(tm, rng, 2.0 * tm.embedding_radius());
      const double f = tm.potential(y);
      const double d = tm.dist_to_manifold(y);
      CHECK(f >= -1e-12);
      CHECK(f >= tm.lambda0() * d * d - 1e-9);
    }
  }
}

TEST_CASE("potential gradient matches finite differences") {
  std::mt19937_64 rng(5);
  for (ManifoldKind kind :
       {ManifoldKind::Circle, ManifoldKind::Torus, ManifoldKind::ProjectivePlane}) {
    TargetManifold tm(kind);
    std::vector<double> grad(tm.ambient_dim());
    for (int t = 0; t < 1000; ++t) {
      auto y = random_ambient(tm, rng, 1.5);
      tm.potential_grad(y, grad);
      double gnorm = 0.0;
      for (double g : grad) gnorm += g * g;
      gnorm = std::sqrt(gnorm);
      for (int q = 0; q < tm.ambient_dim(); ++q) {
        const double h = 1e-5;
        auto yp = y, ym = y;
        yp[q] += h;
        ym[q] -= h;
        const double fd = (tm.potential(yp) - tm.potential(ym)) / (2 * h);
        CHECK(std::abs(grad[q] - fd) < 1e-6 * std::max(1.0, gnorm));
      }
    }
  }
}

TEST_CASE("cutoff psi") {
  TargetManifold circle(ManifoldKind::Circle);
  CHECK(circle.cutoff_psi(std::vector<double>{1, 0}) == doctest::Approx(1.0));
  CHECK(circle.cutoff_psi(std::vector<double>{0, 0}) == doctest::Approx(0.0));
  CHECK(circle.cutoff_psi(std::vector<double>{0.5, 0}) == doctest::Approx(0.5));
}

TEST_CASE("retraction with shift correction") {
  TargetManifold circle(ManifoldKind::Circle);
  std::vector<double> out(2);
  circle.retraction(std::vector<double>{1, 0}, std::vector<double>{0, 0}, out);
  CHECK(out[0] == doctest::Approx(1.0));
  circle.retraction(std::vector<double>{2, 0}, std::vector<double>{0, 0}, out);
  CHECK(out[0] == doctest::Approx(1.0));

  // Shifted case against a 1D root-finding oracle on the circle parameter:
  // find p on S^1 with (p - y)/|p - y| = rho(z - y).
  const std::vector<double> z{1, 0}, y{0.1, 0};
  circle.retraction(z, y, out);
  const double tx = (z[0] - y[0]), ty = (z[1] - y[1]);
  const double tn = std::hypot(tx, ty);
  const double qx = tx / tn, qy = ty / tn;
  double lo = -kPi, hi = kPi, best = 0, bdiff = 1e300;
  for (int grid = 0; grid <= 200000; ++grid) {
    const double a = lo + (hi - lo) * grid / 200000.0;
    const double px = std::cos(a) - y[0], py = std::sin(a) - y[1];
    const double pn = std::hypot(px, py);
    const double diff = sqr(px / pn - qx) + sqr(py / pn - qy);
    if (diff < bdiff) {
      bdiff = diff;
      best = a;
    }
  }
  CHECK(out[0] == doctest::Approx(std::cos(best)).epsilon(1e-4));
  CHECK(out[1] == doctest::Approx(std::sin(best)).epsilon(1e-4));
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-9));

  // rho_y restricted to N is the identity, for every supported target.
  std::mt19937_64 rng(17);
  for (ManifoldKind kind :
       {ManifoldKind::Circle, ManifoldKind::Torus, ManifoldKind::ProjectivePlane}) {
    TargetManifold tm(kind);
    std::vector<double> p(tm.ambient_dim()), r(tm.ambient_dim()),
        shift(tm.ambient_dim());
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      // random point on N
      std::vector<double> amb(tm.ambient_dim());
      for (auto& v : amb) v = unif(rng);
      if (tm.dist_to_manifold(amb) >= tm.theta0()) {
        for (auto& v : amb) v = 0.2 * v;
        if (kind == ManifoldKind::Circle) amb = {1.0 + 0.1 * unif(rng), 0.1 * unif(rng)};
        if (kind == ManifoldKind::Torus)
          amb = {1, 0.1 * unif(rng), 1, 0.1 * unif(rng)};
        if (kind == ManifoldKind::ProjectivePlane) {
          const double n[3] = {1, 0.1 * unif(rng), 0.1 * unif(rng)};
          const double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
          const double nu[3] = {n[0] / nn, n[1] / nn, n[2] / nn};
          sym3::q_from_director(nu, amb);
        }
      }
      tm.project_to_manifold(amb, p);
      for (auto& v : shift) v = 0.8 * tm.delta_star() * unif(rng) / 3.0;
      tm.retraction(p, shift, r);
      double err = 0.0;
      for (int q = 0; q < tm.ambient_dim(); ++q) err += sqr(r[q] - p[q]);
      CHECK(std::sqrt(err) < 1e-9);
      CHECK(tm.dist_to_manifold(r) < 1e-10);
    }
  }

  CHECK_THROWS_AS(
      circle.retraction(std::vector<double>{0.05, 0}, std::vector<double>{0.05, 0},
                        out),
      OnComplex);
}

TEST_CASE("loop classes") {
  TargetManifold circle(ManifoldKind::Circle);
  const int n = 64;
  std::vector<double> samples(2 * n);
  for (int t = 0; t < n; ++t) {
    const double a = 2.0 * kPi * t / n;
    samples[2 * t] = std::cos(2 * a);
    samples[2 * t + 1] = std::sin(2 * a);
  }
  CHECK(circle.loop_class(samples, n) == GroupElement::z(2));

  std::vector<double> constant(2 * 8, 0.0);
  for (int t = 0; t < 8; ++t) constant[2 * t] = 1.0;
  CHECK(circle.loop_class(constant, 8) == GroupElement::z(0));

  // Cyclic rotation, doubling, reversal.
  std::vector<double> rot(samples.begin() + 2 * 5, samples.end());
  rot.insert(rot.end(), samples.begin(), samples.begin() + 2 * 5);
  CHECK(circle.loop_class(rot, n) == GroupElement::z(2));
  std::vector<double> dbl;
  for (int t = 0; t < 2 * n; ++t) {
    const double a = kPi * t / n;
    dbl.push_back(std::cos(2 * a));
    dbl.push_back(std::sin(2 * a));
  }
  CHECK(circle.loop_class(dbl, 2 * n) == GroupElement::z(2));
  std::vector<double> rev;
  for (int t = n - 1; t >= 0; --t) {
    rev.push_back(samples[2 * t]);
    rev.push_back(samples[2 * t + 1]);
  }
  CHECK(circle.loop_class(rev, n) == GroupElement::z(-2));

  // Torus: pair of windings.
  TargetManifold torus(ManifoldKind::Torus);
  std::vector<double> ts(4 * n);
  for (int t = 0; t < n; ++t) {
    const double a = 2.0 * kPi * t / n;
    ts[4 * t] = std::cos(a);
    ts[4 * t + 1] = std::sin(a);
    ts[4 * t + 2] = std::cos(-a);
    ts[4 * t + 3] = std::sin(-a);
  }
  CHECK(torus.loop_class(ts, n) == GroupElement::torus(1, -1));

  // Projective plane: a director rotating by pi is the nonzero class; the
  // sign-transport oracle at 256 samples agrees.
  TargetManifold rp2(ManifoldKind::ProjectivePlane);
  const int m = 256;
  std::vector<double> qs(5 * m);
  std::vector<double> q(5);
  int oracle_flips = 0;
  double prev[3] = {1, 0, 0};
  for (int t = 0; t < m; ++t) {
    const double a = kPi * t / m;
    const double nd[3] = {std::cos(a), std::sin(a), 0};
    sym3::q_from_director(nd, q);
    std::copy(q.begin(), q.end(), qs.begin() + 5 * t);
    const double d = nd[0] * prev[0] + nd[1] * prev[1] + nd[2] * prev[2];
    if (d < 0) ++oracle_flips;
    prev[0] = d < 0 ? -nd[0] : nd[0];
    prev[1] = d < 0 ? -nd[1] : nd[1];
    prev[2] = d < 0 ? -nd[2] : nd[2];
  }
  // closing edge: transported representative vs the initial one
  if (prev[0] * 1 + prev[1] * 0 + prev[2] * 0 < 0) ++oracle_flips;
  CHECK((oracle_flips & 1) == 1);
  CHECK(rp2.loop_class(qs, m) == GroupElement::z2(1));
  CHECK(rp2.loop_class(qs, m) == rp2.loop_class(qs, m));  // deterministic

  // Reversal fixes the Z/2 class.
  std::vector<double> qrev;
  for (int t = m - 1; t >= 0; --t)
    qrev.insert(qrev.end(), qs.begin() + 5 * t, qs.begin() + 5 * (t + 1));
  CHECK(rp2.loop_class(qrev, m) == GroupElement::z2(1));

  // Undersampled loops are rejected.
  std::vector<double> sparse(2 * 3);
  for (int t = 0; t < 3; ++t) {
    const double a = 2.0 * kPi * t / 3 * 2;  // two turns in three samples
    sparse[2 * t] = std::cos(a);
    sparse[2 * t + 1] = std::sin(a);
  }
  CHECK_THROWS_AS(circle.loop_class(sparse, 3), Undersampled);
}

TEST_CASE("loop concatenation adds classes") {
  TargetManifold circle(ManifoldKind::Circle);
  // Two loops through the common basepoint (1,0): one winding +1, one +2;
  // their concatenation winds +3.
  const int n = 48;
  auto loop = [&](int deg) {
    std::vector<double> s;
    for (int t = 0; t < n; ++t) {
      const double a = 2.0 * kPi * t / n;
      s.push_back(std::cos(deg * a));
      s.push_back(std::sin(deg * a));
    }
    return s;
  };
  auto l1 = loop(1), l2 = loop(2);
  std::vector<double> cat = l1;
  cat.push_back(1.0);
  cat.push_back(0.0);
  cat.insert(cat.end(), l2.begin(), l2.end());
  const GroupElement c = circle.loop_class(cat, cat.size() / 2);
  CHECK(c == GroupElement::z(3));
}
