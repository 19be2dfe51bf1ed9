#pragma once

#include <vector>

#include "glc/field.hpp"

namespace glc {

struct EnergyReport {
  double total = 0.0;
  double dirichlet = 0.0;
  double potential = 0.0;
  double epsilon = 0.0;
  double normalized = 0.0;  // total / |log eps|
  std::vector<double> per_cell_density;
};

struct SolverOptions {
  int max_iters = 2000;
  double grad_tol = 1e-4;
  enum class StepRule { Fixed, Backtracking } step_rule = StepRule::Backtracking;
  double initial_step = 0.5;
  int record_every = 10;
};

struct TraceRow {
  int iter;
  double energy;
  double dirichlet;
  double potential;
  double grad_norm;  // max node gradient magnitude
  double step;
};

// Discrete E_eps: forward differences per interior cell for the Dirichlet
// term, corner-averaged potential, integrated over cells fully inside the
// domain mask.
EnergyReport energy(const Field& u, double eps, bool with_density = false);

// Exact gradient of the discrete energy; zero on Dirichlet and outside nodes.
std::vector<double> energy_grad(const Field& u, double eps);

struct MinimizeResult {
  Field field;
  EnergyReport report;
  std::vector<TraceRow> trace;
  int iterations = 0;
  bool converged = false;
};

MinimizeResult minimize(const Field& u0, double eps, const SolverOptions& opts);

// Plain Dirichlet integral of |grad u|^2 (no 1/2 factor); the right-hand
// side of the mass bound.
double dirichlet_integral(const Field& u);

}  // namespace glc
