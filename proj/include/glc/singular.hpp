#pragma once

#include <cstdint>

#include "glc/chain.hpp"
#include "glc/energy.hpp"
#include "glc/field.hpp"

namespace glc {

// Sampling lattice of size h laid over the field domain with offset
// a in [0,h)^d. Plaquette homotopy classes are read on its 1-skeleton and
// the singular chain lives on the dual cells.
struct SingularGrid {
  Point anchor{0, 0, 0};  // position of lattice vertex (0,0,0)
  Point offset{0, 0, 0};  // a, kept for reporting
  double h = 1.0;
  int dims = 2;
  std::array<int, 3> nv = {0, 0, 1};  // lattice vertex counts

  Point vertex(int i, int j, int k = 0) const {
    return {anchor[0] + h * i, anchor[1] + h * j,
            dims == 3 ? anchor[2] + h * k : 0.0};
  }
};

// Plaquette id: lattice corner (i,j,k) plus the normal axis (2 in 2D).
struct FaceId {
  int i = 0, j = 0, k = 0;
  int normal_axis = 2;
};

double default_grid_size(const Field& u, double eps);

SingularGrid grid_from_offset(const Field& u, double h, const Point& offset);

// Offset search: among `trials` seeded uniform offsets, minimise the
// Dirichlet density integrated along the 1-skeleton plus a penalty on the
// worst distance to N seen on the skeleton.
SingularGrid choose_grid(const Field& u, double h, int trials, uint64_t seed = 0);

// sup over skeleton samples of dist(u, N); compare against
// dist(N, X) - delta_star for admissibility.
double skeleton_check(const Field& u, const SingularGrid& g);

GroupElement plaquette_class(const Field& u, const SingularGrid& g, const FaceId& face,
                             std::span<const double> y);

// Dual polyhedral chain of plaquette classes: 0-chain of dual points in 2D,
// 1-chain of dual edges in 3D with vanishing interior boundary.
PolyChain extract_chain(const Field& u, const SingularGrid& g,
                        std::span<const double> y);

struct ExtractStats {
  double skeleton_max_dist = 0.0;
  int n_plaquettes = 0;
  int n_nonzero = 0;
  double mass = 0.0;
};

PolyChain extract_chain(const Field& u, const SingularGrid& g,
                        std::span<const double> y, ExtractStats* stats);

struct MassBoundSample {
  double avg_mass = 0.0;
  double dirichlet = 0.0;
  double ratio = 0.0;
};

// Monte-Carlo average over shifts y in B* of the extracted mass, against
// the Dirichlet integral of u.
MassBoundSample sample_mass_bound(const Field& u, const SingularGrid& g,
                                  int n_samples, uint64_t seed = 0);

}  // namespace glc
