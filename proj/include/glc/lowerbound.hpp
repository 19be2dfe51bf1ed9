#pragma once

#include <vector>

#include "glc/chain.hpp"
#include "glc/field.hpp"

namespace glc {

struct BallParams {
  double C0 = 1.0;
  double N_exp = 3.0;
  double C2 = 2.0;        // crossing scale, in units of eps
  double C1 = -1.0;       // derived from (C0, N_exp, C2) when non-positive
  double tau = -1.0;      // final growth scale; derived from the collar when <= 0
  double s_threshold = 0.5;
  double eps0 = 2.0;      // admissibility cap on eps |log eps| |sigma|_*

  double c1() const;      // effective C1
};

// min over mu in [0,1] of mu^2/rho + (C0/eps)(1-mu)^N, solved by bisection
// on the stationarity equation.
double lambda_eps(double rho, double eps, const BallParams& p = {});

// integral of min(lambda_eps, C1/eps) from 0 to rho; adaptive quadrature.
double Lambda_eps(double rho, double eps, const BallParams& p = {});

struct EssentialComponent {
  std::vector<size_t> nodes;
  GroupElement cls;
  Point center{0, 0, 0};
  double radius = 0.0;
  bool essential = false;
};

// Connected components of {s <= 1/2}, s = clamp(1 - dist(u,N)/theta0, 0, 1),
// labelled by the homotopy class on an enclosing grid contour. 2D only.
std::vector<EssentialComponent> essential_components(const Field& u,
                                                     const BallParams& p = {});

struct BallInfo {
  Point center{0, 0, 0};
  double radius = 0.0;
  GroupElement cls;
};

struct LowerBoundCertificate {
  std::vector<BallInfo> balls;
  double certified_bound = 0.0;
  double measured_energy = 0.0;
  GroupElement total_class;
  double collar_r = 0.0;  // measured dist(S_E, boundary)
  double tau = 0.0;
  int refused_slices = 0;  // 3D slicing only
};

// Synchronous ball growth in the scale r_i/|sigma_i|_* with merge-on-contact,
// accumulating |sigma|_* Lambda_eps increments up to the final scale tau.
LowerBoundCertificate ball_construction(const Field& u, double eps,
                                        const BallParams& p = {});

// 3D bound by summing per-slice 2D certificates over planes orthogonal to
// the given axis; slices that refuse certification contribute zero.
LowerBoundCertificate ball_construction_sliced(const Field& u, double eps, int axis,
                                               const BallParams& p = {});

}  // namespace glc
