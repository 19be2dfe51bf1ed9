#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "glc/energy.hpp"
#include "glc/errors.hpp"

using namespace glc;

namespace {
constexpr double kPi = std::numbers::pi;

Field constant_field(ManifoldKind kind, int n, double box_half) {
  DomainSpec dom{DomainKind::FullBox, 0, 0};
  Field f(kind, 2, {n, n, 1}, {-box_half, -box_half, 0}, 2 * box_half / (n - 1),
          dom);
  const TargetManifold tm(kind);
  std::vector<double> p(tm.ambient_dim(), 0.0);
  // a fixed point of N
  if (kind == ManifoldKind::Circle) {
    p = {1, 0};
  } else if (kind == ManifoldKind::Torus) {
    p = {1, 0, 0, 1};
  } else {
    const double nd[3] = {1, 0, 0};
    sym3::q_from_director(nd, p);
  }
  const size_t N = f.node_count();
  for (size_t id = 0; id < N; ++id)
    std::copy(p.begin(), p.end(), f.value(id).begin());
  return f;
}

}  // namespace

TEST_CASE("energy of constant fields vanishes") {
  for (ManifoldKind kind :
       {ManifoldKind::Circle, ManifoldKind::Torus, ManifoldKind::ProjectivePlane}) {
    Field f = constant_field(kind, 17, 1.0);
    const EnergyReport rep = energy(f, 0.1);
    CHECK(rep.total == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("annulus Dirichlet energy matches the closed-form integral") {
  // u = x/|x| on rho1 < |x| < rho2: Dirichlet term integrates to
  // pi log(rho2/rho1).
  const double rho1 = 0.25, rho2 = 1.0;
  DomainSpec dom{DomainKind::Annulus2D, rho1, rho2};
  const int n = 256;
  Field f(ManifoldKind::Circle, 2, {n, n, 1}, {-1.05, -1.05, 0}, 2.1 / (n - 1),
          dom);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Point p = f.position(i, j);
      const double r = std::max(std::hypot(p[0], p[1]), 1e-12);
      auto v = f.value(f.index(i, j));
      v[0] = p[0] / r;
      v[1] = p[1] / r;
    }
  const EnergyReport rep = energy(f, 0.1);
  const double expected = kPi * std::log(rho2 / rho1);
  CHECK(std::abs(rep.dirichlet - expected) < 0.02 * expected);
}

TEST_CASE("potential term scales out on N-valued fields") {
  Field f = constant_field(ManifoldKind::Circle, 17, 1.0);
  // add a nontrivial N-valued variation
  for (int i = 0; i < 17; ++i)
    for (int j = 0; j < 17; ++j) {
      const double a = 0.3 * i - 0.2 * j;
      auto v = f.value(f.index(i, j));
      v[0] = std::cos(a);
      v[1] = std::sin(a);
    }
  const double e1 = energy(f, 0.1).total;
  const double e2 = energy(f, 0.2).total;
  CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
}

TEST_CASE("gradient is exact for the discrete energy") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-0.7, 0.7);
  for (ManifoldKind kind :
       {ManifoldKind::Circle, ManifoldKind::Torus, ManifoldKind::ProjectivePlane}) {
    Field f = constant_field(kind, 9, 1.0);
    const size_t N = f.node_count();
    for (size_t id = 0; id < N; ++id)
      for (int q = 0; q < f.m(); ++q) f.value(id)[q] += 0.3 * unif(rng);
    const double eps = 0.3;
    const auto grad = energy_grad(f, eps);

    // Directional derivative against central differences in a random
    // interior direction.
    std::vector<double> dir(grad.size(), 0.0);
    for (size_t id = 0; id < N; ++id) {
      if (f.mask(id) != kInterior) continue;
      for (int q = 0; q < f.m(); ++q) dir[id * f.m() + q] = unif(rng);
    }
    double gdot = 0.0;
    for (size_t k = 0; k < grad.size(); ++k) gdot += grad[k] * dir[k];

    const double h = 1e-6;
    Field fp = f, fm = f;
    for (size_t k = 0; k < grad.size(); ++k) {
      fp.raw_values()[k] += h * dir[k];
      fm.raw_values()[k] -= h * dir[k];
    }
    const double fd = (energy(fp, eps).total - energy(fm, eps).total) / (2 * h);
    CHECK(std::abs(gdot - fd) < 1e-5 * std::max(1.0, std::abs(gdot)));

    // Dirichlet nodes carry zero gradient.
    for (size_t id = 0; id < N; ++id)
      if (f.is_dirichlet(id))
        for (int q = 0; q < f.m(); ++q) CHECK(grad[id * f.m() + q] == 0.0);
  }
}

TEST_CASE("descent: constant critical field returns immediately") {
  Field f = constant_field(ManifoldKind::Circle, 17, 1.0);
  SolverOptions opts;
  opts.grad_tol = 1e-8;
  const MinimizeResult res = minimize(f, 0.1, opts);
  CHECK(res.iterations == 0);
  CHECK(res.converged);
}

TEST_CASE("descent trace is monotone and respects Dirichlet nodes") {
  DatumSpec spec;
  spec.kind = DatumSpec::Kind::DiskDegree;
  spec.target = ManifoldKind::Circle;
  spec.resolution = 49;
  spec.degree = 1;
  Field u0 = make_boundary_datum(spec);
  SolverOptions opts;
  opts.max_iters = 300;
  opts.grad_tol = 1e-5;
  opts.record_every = 1;
  const MinimizeResult res = minimize(u0, 0.1, opts);
  REQUIRE(res.trace.size() > 3);
  for (size_t t = 1; t < res.trace.size(); ++t)
    CHECK(res.trace[t].energy <= res.trace[t - 1].energy + 1e-12);
  const size_t N = u0.node_count();
  for (size_t id = 0; id < N; ++id)
    if (u0.is_dirichlet(id))
      for (int q = 0; q < u0.m(); ++q)
        CHECK(res.field.value(id)[q] == u0.value(id)[q]);
  CHECK(res.report.total < energy(u0, 0.1).total);
}

TEST_CASE("regularized vortex energy grows like mass times |log eps|") {
  // Canonical degree-1 construction: u = x/|x| on the disk, singular chain
  // one unit point at the origin, regularised at scale eps. The fitted
  // slope of E_eps against |log eps| stays within 15% of the chain mass.
  DomainSpec dom{DomainKind::Disk2D, 1.0, 0};
  const int n = 192;
  Field w(ManifoldKind::Circle, 2, {n, n, 1}, {-1.05, -1.05, 0}, 2.1 / (n - 1),
          dom);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Point p = w.position(i, j);
      const double r = std::max(std::hypot(p[0], p[1]), 1e-12);
      auto v = w.value(w.index(i, j));
      v[0] = p[0] / r;
      v[1] = p[1] / r;
    }
  PolyChain s(0, 2, GroupKind::Z_circle);
  s.add_point({0, 0, 0}, GroupElement::z(1));

  const std::vector<double> eps_list{0.1, 0.05, 0.025};
  std::vector<double> xs, ys;
  for (double eps : eps_list) {
    const Field we = regularize(w, s, eps);
    xs.push_back(std::abs(std::log(eps)));
    ys.push_back(energy(we, eps).total);
  }
  // least-squares slope
  double mx = 0, my = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k] / xs.size();
    my += ys[k] / ys.size();
  }
  double num = 0, den = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    num += (xs[k] - mx) * (ys[k] - my);
    den += (xs[k] - mx) * (xs[k] - mx);
  }
  const double slope = num / den;
  const CoefficientGroup cg(GroupKind::Z_circle);
  const double mass = s.mass(cg);
  CHECK(std::abs(slope - mass) < 0.15 * mass);
}
