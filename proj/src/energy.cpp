#include "glc/energy.hpp"

#include <algorithm>
#include <cmath>

#include "glc/errors.hpp"

namespace glc {

namespace {

// Cell-edge table: for each grid cell the edges grouped by direction. The
// Dirichlet quadrature per cell is h^{d-2}/2^d * sum over cell edges of
// |u_a - u_b|^2, which reproduces the exact integral for affine data.
struct CellGeom {
  int dims;
  int n_edges;
  int corner_offsets[8][3];
  int edge_from[12][3];
  int edge_to[12][3];
  int n_corners;
};

CellGeom cell_geom(int dims) {
  CellGeom g{};
  g.dims = dims;
  g.n_corners = dims == 3 ? 8 : 4;
  const int kmax = dims == 3 ? 1 : 0;
  int nc = 0;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= kmax; ++c) {
        g.corner_offsets[nc][0] = a;
        g.corner_offsets[nc][1] = b;
        g.corner_offsets[nc][2] = c;
        ++nc;
      }
  int ne = 0;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= kmax; ++c) {
        if (a == 0) {
          g.edge_from[ne][0] = 0; g.edge_from[ne][1] = b; g.edge_from[ne][2] = c;
          g.edge_to[ne][0] = 1;   g.edge_to[ne][1] = b;   g.edge_to[ne][2] = c;
          ++ne;
        }
        if (b == 0) {
          g.edge_from[ne][0] = a; g.edge_from[ne][1] = 0; g.edge_from[ne][2] = c;
          g.edge_to[ne][0] = a;   g.edge_to[ne][1] = 1;   g.edge_to[ne][2] = c;
          ++ne;
        }
        if (c == 0 && dims == 3) {
          g.edge_from[ne][0] = a; g.edge_from[ne][1] = b; g.edge_from[ne][2] = 0;
          g.edge_to[ne][0] = a;   g.edge_to[ne][1] = b;   g.edge_to[ne][2] = 1;
          ++ne;
        }
      }
  g.n_edges = ne;
  return g;
}

template <typename PerCell>
void for_each_inside_cell(const Field& u, PerCell&& fn) {
  const auto& s = u.shape();
  const int kmax = u.dims() == 3 ? s[2] - 1 : 1;
  for (int i = 0; i + 1 < s[0]; ++i)
    for (int j = 0; j + 1 < s[1]; ++j)
      for (int k = 0; k < kmax; ++k) {
        if (!u.cell_inside(i, j, k)) continue;
        fn(i, j, k);
      }
}

}  // namespace

EnergyReport energy(const Field& u, double eps, bool with_density) {
  if (eps <= 0) throw std::invalid_argument("energy needs eps > 0");
  const auto& tm = u.target();
  const int d = u.dims();
  const double h = u.spacing();
  const CellGeom g = cell_geom(d);
  const double vol = std::pow(h, d);
  // One half of |grad u|^2 integrates to h^{d-2}/2^d per squared edge
  // difference (each direction averaged over its 2^{d-1} parallel edges).
  const double dir_coef = std::pow(h, d - 2) / double(1 << d);
  const double pot_coef = vol / double(g.n_corners);

  EnergyReport rep;
  rep.epsilon = eps;
  const auto& s = u.shape();
  if (with_density)
    rep.per_cell_density.assign(size_t(s[0]) * s[1] * s[2], 0.0);

  const double inv_eps2 = 1.0 / (eps * eps);
  for_each_inside_cell(u, [&](int i, int j, int k) {
    double dir = 0.0;
    for (int e = 0; e < g.n_edges; ++e) {
      const size_t a = u.index(i + g.edge_from[e][0], j + g.edge_from[e][1],
                               k + g.edge_from[e][2]);
      const size_t b =
          u.index(i + g.edge_to[e][0], j + g.edge_to[e][1], k + g.edge_to[e][2]);
      const auto va = u.value(a), vb = u.value(b);
      for (int q = 0; q < u.m(); ++q) dir += sqr(va[q] - vb[q]);
    }
    dir *= dir_coef;
    double pot = 0.0;
    for (int c = 0; c < g.n_corners; ++c) {
      const size_t id = u.index(i + g.corner_offsets[c][0], j + g.corner_offsets[c][1],
                                k + g.corner_offsets[c][2]);
      pot += tm.potential(u.value(id));
    }
    pot *= pot_coef * inv_eps2;
    rep.dirichlet += dir;
    rep.potential += pot;
    if (with_density)
      rep.per_cell_density[u.index(i, j, k)] = (dir + pot) / vol;
  });
  rep.total = rep.dirichlet + rep.potential;
  rep.normalized = rep.total / std::abs(std::log(eps));
  return rep;
}

double dirichlet_integral(const Field& u) {
  EnergyReport r = energy(u, 1.0);
  return 2.0 * r.dirichlet;
}

std::vector<double> energy_grad(const Field& u, double eps) {
  if (eps <= 0) throw std::invalid_argument("energy_grad needs eps > 0");
  const auto& tm = u.target();
  const int d = u.dims();
  const double h = u.spacing();
  const CellGeom g = cell_geom(d);
  const double dir_coef = std::pow(h, d - 2) / double(1 << (d - 1));
  const double pot_coef = std::pow(h, d) / double(g.n_corners) / (eps * eps);

  std::vector<double> grad(u.raw_values().size(), 0.0);
  std::vector<double> pg(u.m());
  for_each_inside_cell(u, [&](int i, int j, int k) {
    for (int e = 0; e < g.n_edges; ++e) {
      const size_t a = u.index(i + g.edge_from[e][0], j + g.edge_from[e][1],
                               k + g.edge_from[e][2]);
      const size_t b =
          u.index(i + g.edge_to[e][0], j + g.edge_to[e][1], k + g.edge_to[e][2]);
      const auto va = u.value(a), vb = u.value(b);
      for (int q = 0; q < u.m(); ++q) {
        const double diff = dir_coef * (va[q] - vb[q]);
        grad[a * u.m() + q] += diff;
        grad[b * u.m() + q] -= diff;
      }
    }
    for (int c = 0; c < g.n_corners; ++c) {
      const size_t id = u.index(i + g.corner_offsets[c][0], j + g.corner_offsets[c][1],
                                k + g.corner_offsets[c][2]);
      tm.potential_grad(u.value(id), pg);
      for (int q = 0; q < u.m(); ++q) grad[id * u.m() + q] += pot_coef * pg[q];
    }
  });
  // Constrained nodes carry no descent direction.
  const size_t N = u.node_count();
  for (size_t id = 0; id < N; ++id)
    if (u.mask(id) != kInterior)
      std::fill_n(grad.begin() + id * u.m(), u.m(), 0.0);
  return grad;
}

MinimizeResult minimize(const Field& u0, double eps, const SolverOptions& opts) {
  MinimizeResult res;
  res.field = u0;
  Field& u = res.field;
  const size_t nv = u.raw_values().size();

  EnergyReport rep = energy(u, eps);
  if (!std::isfinite(rep.total)) throw NonFiniteEnergy("non-finite initial energy");

  double step = opts.initial_step;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const std::vector<double> grad = energy_grad(u, eps);
    double gmax = 0.0, g2 = 0.0;
    const size_t N = u.node_count();
    for (size_t id = 0; id < N; ++id) {
      double n2 = 0.0;
      for (int q = 0; q < u.m(); ++q) n2 += sqr(grad[id * u.m() + q]);
      gmax = std::max(gmax, std::sqrt(n2));
      g2 += n2;
    }
    if (opts.record_every > 0 && it % opts.record_every == 0)
      res.trace.push_back({it, rep.total, rep.dirichlet, rep.potential, gmax, step});
    if (gmax < opts.grad_tol) {
      res.converged = true;
      break;
    }

    if (opts.step_rule == SolverOptions::StepRule::Fixed) {
      auto vals = u.raw_values();
      for (size_t q = 0; q < nv; ++q) vals[q] -= step * grad[q];
      rep = energy(u, eps);
      if (!std::isfinite(rep.total))
        throw NonFiniteEnergy("energy overflow during fixed-step descent");
      continue;
    }

    // Backtracking line search with Armijo decrease on the full gradient.
    const std::vector<double> saved(u.raw_values().begin(), u.raw_values().end());
    bool accepted = false;
    for (int bt = 0; bt < 60 && step >= 1e-14; ++bt) {
      auto vals = u.raw_values();
      for (size_t q = 0; q < nv; ++q) vals[q] = saved[q] - step * grad[q];
      const EnergyReport trial_rep = energy(u, eps);
      if (std::isfinite(trial_rep.total) &&
          trial_rep.total <= rep.total - 1e-4 * step * g2) {
        rep = trial_rep;
        accepted = true;
        step = std::min(step * 1.25, 1e6);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      std::copy(saved.begin(), saved.end(), u.raw_values().begin());
      break;  // no admissible step left; gradient is numerically stationary
    }
  }
  res.iterations = it;
  res.report = energy(u, eps);
  return res;
}

}  // namespace glc
