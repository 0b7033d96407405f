#pragma once

#include <string>

#include "hmlab/types.hpp"

namespace hmlab {

enum class TargetKind { UnitSphere, CliffordTorus, TorusOfRevolution };

/// A closed analytic submanifold N of R^n with a closed-form nearest-point
/// projection. First and second derivatives of the projection are available
/// anywhere inside the tubular neighborhood, not only on N itself.
///
/// Supported targets:
///  - UnitSphere(n): the unit sphere in R^n, intrinsic dimension n - 1.
///  - CliffordTorus(m): product of m unit circles in R^{2m}.
///  - TorusOfRevolution(R, r): torus in R^3 around the x3 axis.
class EmbeddedTarget {
 public:
  static EmbeddedTarget unit_sphere(int ambient_dim);
  static EmbeddedTarget clifford_torus(int circles);
  static EmbeddedTarget torus_of_revolution(double major_radius, double minor_radius);

  TargetKind kind() const noexcept { return kind_; }
  int ambient_dim() const noexcept { return ambient_dim_; }
  int intrinsic_dim() const noexcept { return intrinsic_dim_; }
  double major_radius() const noexcept { return major_radius_; }
  double minor_radius() const noexcept { return minor_radius_; }

  /// Radius of the normal neighborhood on which the projection is single valued.
  double tubular_radius() const noexcept { return tubular_radius_; }

  /// Ambient distance from x to N.
  double distance(const Vec& x) const;

  /// Residual of the defining equations at y (zero iff y lies on N).
  double residual(const Vec& y) const;

  bool on_target(const Vec& y, double tol = kOnTargetTol) const { return residual(y) <= tol; }

  /// Nearest point on N. Throws OutsideTubularNeighborhood when dist(x, N) >= delta_0.
  Vec project(const Vec& x) const;

  /// d pi(x) for any x in the tubular neighborhood (n x n).
  Mat projection_jacobian(const Vec& x) const;

  /// d^2 pi(x)(v, w) for any x in the tubular neighborhood.
  Vec projection_hessian(const Vec& x, const Vec& v, const Vec& w) const;

  /// Orthogonal projector onto T_y N. Requires y on N.
  Mat tangent_projector(const Vec& y) const;

  /// P(y) v without forming the matrix. Requires y on N (not checked).
  Vec tangent_part(const Vec& y, const Vec& v) const;

  /// d^2 pi(y)(v, w) for y on N and arbitrary ambient v, w.
  Vec ambient_hessian_of_projection(const Vec& y, const Vec& v, const Vec& w) const;

  /// A(y)(v, w) := -d^2 pi(y)(v, w) for tangent v, w; normal valued.
  Vec second_fundamental_form(const Vec& y, const Vec& v, const Vec& w) const;

  std::string describe() const;

  static constexpr double kOnTargetTol = 1e-9;
  static constexpr double kTangentTol = 1e-9;

 private:
  EmbeddedTarget() = default;
  void require_on_target(const Vec& y) const;
  void require_dim(const Vec& x) const;

  TargetKind kind_ = TargetKind::UnitSphere;
  int ambient_dim_ = 0;
  int intrinsic_dim_ = 0;
  double tubular_radius_ = 0.0;
  double major_radius_ = 0.0;
  double minor_radius_ = 0.0;
};

}  // namespace hmlab
