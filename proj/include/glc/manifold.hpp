#pragma once

#include <span>
#include <vector>

#include "glc/group.hpp"

namespace glc {

enum class ManifoldKind { Circle, Torus, ProjectivePlane };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& s);

// Symmetric traceless 3x3 matrices are stored as 5-vectors in an
// orthonormal basis, so Euclidean and Frobenius distances agree.
namespace sym3 {
void vec_to_mat(std::span<const double> a, double M[3][3]);
void mat_to_vec(const double M[3][3], std::span<double> a);
// Eigenvalues in descending order, matching unit eigenvectors as columns.
void eigen_sym3(const double M[3][3], double lambda[3], double V[3][3]);
void q_from_director(const double n[3], std::span<double> q);
}  // namespace sym3

// Embedded target N in R^m together with its potential, nearest-point
// projection, the retraction off the shifted dual complex, and the
// homotopy-class evaluator for sampled loops on N.
class TargetManifold {
 public:
  explicit TargetManifold(ManifoldKind kind, double theta0 = -1.0,
                          double delta_star = -1.0);

  ManifoldKind kind() const { return kind_; }
  GroupKind group_kind() const;
  const CoefficientGroup& group() const { return group_; }

  int ambient_dim() const { return m_; }
  double theta0() const { return theta0_; }
  double delta_star() const { return delta_star_; }
  double lambda0() const { return lambda0_; }
  double embedding_radius() const;       // max |z| over N
  double dist_N_to_complex() const;      // dist(N, X)

  double dist_to_manifold(std::span<const double> y) const;
  void project_to_manifold(std::span<const double> y, std::span<double> out) const;

  double potential(std::span<const double> y) const;
  void potential_grad(std::span<const double> y, std::span<double> out) const;

  double dist_to_complex(std::span<const double> z) const;
  double cutoff_psi(std::span<const double> z) const;

  // rho_y(z): retraction of z onto N through the complex shifted by y,
  // with the boundary-diffeomorphism correction inverted per point.
  void retraction(std::span<const double> z, std::span<const double> y,
                  std::span<double> out) const;

  // Homotopy class of a sampled closed loop on N. `samples` is row-major
  // (count x m); the closing edge last->first is implied.
  GroupElement loop_class(std::span<const double> samples, size_t count) const;

  // Phase increment bookkeeping used by the grid extraction: the class of a
  // closed loop is the wrapped sum of per-edge increments, so shared edges
  // cancel exactly. For Circle the increment is a phase in (-pi, pi); for
  // Torus one per factor; for the projective plane a sign-transport bit.
  struct EdgeIncrement {
    double phase1 = 0.0;
    double phase2 = 0.0;
    int bit = 0;
  };
  EdgeIncrement edge_increment(std::span<const double> samples, size_t count) const;
  GroupElement class_from_increment(const EdgeIncrement& inc) const;
  static EdgeIncrement add(const EdgeIncrement& u, const EdgeIncrement& v);
  static EdgeIncrement negate(const EdgeIncrement& u);

 private:
  double factor_increment(std::span<const double> z1, std::span<const double> z2,
                          int offset) const;

  ManifoldKind kind_;
  CoefficientGroup group_;
  int m_;
  double theta0_;
  double delta_star_;
  double lambda0_;
};

}  // namespace glc
