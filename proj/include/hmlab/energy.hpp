#pragma once

#include <vector>

#include "hmlab/map_field.hpp"
#include "hmlab/types.hpp"

namespace hmlab {

/// Dirichlet energy 1/2 sum_x area_x |df|^2(x).
double energy(const MapField& f);

/// Tension dpi(f) Laplacian(f), the L^2 gradient of the discrete energy.
TangentField tension(const MapField& f);

/// Laplacian(f) - A(f)(df, df) with the second fundamental form contracted
/// against the element gradients (tangentially projected at each vertex).
/// The result is only approximately tangent, so it is returned as a plain field.
Field tension_via_sff(const MapField& f);

/// |centered difference of t -> E(pi(f + t u)) at 0 - <u, tension(f)>|.
/// Throws ChartRadiusExceeded when h_step |u|_inf leaves half the tube.
double gradient_pairing_check(const MapField& f, const TangentField& u, double h_step);

/// Linearized tension: P Laplacian(v) + sum_i e_i <d^2 pi(f)(v, e_i), Laplacian(f)>.
TangentField hessian_apply(const MapField& f, const TangentField& v);

/// Orthonormal tangent frame at each vertex (ambient_dim x intrinsic_dim),
/// built by pivoted Gram-Schmidt on the columns of the tangent projector.
/// Pivot: largest remaining squared norm first, ties to the lower index.
std::vector<Mat> tangent_frames(const MapField& f);

/// Frame at a single point y of the target.
Mat tangent_frame(const EmbeddedTarget& target, const Vec& y);

/// Hessian in frame coordinates, scaled by the square root of the vertex
/// areas so that the matrix is the operator v -> M'(f) v in an orthonormal
/// basis of the mass inner product. Degree of freedom x * m + a is the
/// a-th frame vector at vertex x.
struct HessianMatrix {
  SparseMat matrix;          // symmetrized (H + H^T) / 2
  std::vector<Mat> frames;
  Vec dof_mass;              // vertex area per degree of freedom
  double asymmetry = 0.0;    // |H - H^T|_F / |H|_F before symmetrization
  int basis_dim = 0;

  /// Frame coordinates (unscaled) to a tangent field and back.
  Field to_field(const Vec& coords) const;
  Vec to_coords(const Field& values) const;
};

HessianMatrix hessian_matrix(const MapField& f);

/// dpi(f_limit) applied to tension(f): the tension read in the fixed tangent
/// bundle of f_limit. Requires |f - f_limit|_inf < delta_0 / 2.
TangentField tension_fixed_chart(const MapField& f_limit, const MapField& f);

/// L^2 norm of a vertex field.
double l2_norm(const SourceMesh& mesh, const Field& values);

}  // namespace hmlab
