#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmlab/types.hpp"

namespace hmlab {

enum class MeshKind { Circle, FlatTorus, RoundSphere };

struct MeshSpec {
  MeshKind kind = MeshKind::Circle;
  int n = 128;                 // Circle vertex count
  int nu = 32, nv = 32;        // FlatTorus grid
  double lu = 0.0, lv = 0.0;   // FlatTorus side lengths (0 means 2 pi)
  int level = 3;               // RoundSphere icosphere subdivision level

  static MeshSpec circle(int n);
  static MeshSpec flat_torus(int nu, int nv, double lu, double lv);
  static MeshSpec icosphere(int level);

  /// Same kind with the refinement parameter replaced (n, nu = nv, or level).
  MeshSpec refined(int refinement) const;

  std::string describe() const;
  bool operator==(const MeshSpec&) const = default;
};

/// A discrete differential element. `gradient` maps the values at `vertices`
/// to the components of the gradient in an orthonormal frame of the element,
/// so |df|^2 on the element is the squared Frobenius norm of gradient * f_e.
/// `share` is the portion of `measure` credited to each incident vertex when
/// element quantities are averaged onto vertices.
struct Element {
  std::vector<int> vertices;
  Mat gradient;
  double measure = 0.0;
  double share = 0.0;
};

/// Discretization of a closed source manifold with lumped mass and the
/// nonnegative Laplace-Beltrami operator (sign convention: Laplacian = d* d).
///
/// The stiffness matrix is assembled from the elements as
/// sum_e measure_e G_e^T G_e, so the discrete Dirichlet form, the energy
/// density and the Laplacian are one quadrature:
///   sum_x area_x density_x(f) = <f, L f>,   Laplacian = M^{-1} L.
/// The Circle uses fourth-order edge-midpoint derivatives (a five-point
/// Laplacian), the FlatTorus second-order central differences and the
/// RoundSphere the flat-face cotangent stencil with the geodesic face areas
/// lumped barycentrically onto the vertices.
class SourceMesh {
 public:
  static SourceMesh build(const MeshSpec& spec);

  const MeshSpec& spec() const noexcept { return spec_; }
  MeshKind kind() const noexcept { return spec_.kind; }
  int dimension() const noexcept { return dimension_; }
  int vertex_count() const noexcept { return static_cast<int>(areas_.size()); }
  int refinement_level() const noexcept;

  const Vec& vertex_areas() const noexcept { return areas_; }
  double total_area() const noexcept { return areas_.sum(); }
  const SparseMat& stiffness() const noexcept { return stiffness_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }

  /// Vertex positions: unit vectors in R^3 (RoundSphere), (cos t, sin t)
  /// (Circle), or parameter coordinates (u, v) (FlatTorus).
  const Field& positions() const noexcept { return positions_; }

  /// Circle only: angle of each vertex.
  double angle(int vertex) const;

  /// Analytic low-frequency eigenfunctions evaluated at the vertices, in a
  /// fixed order of nondecreasing eigenvalue (at most kMaxModes columns).
  /// The functions do not depend on the resolution, so refinement studies
  /// compare the same continuum fields.
  Field band_limited_modes(int count) const;

  static constexpr int kMaxModes = 9;

  /// Vertex incidence: elements touching each vertex.
  const std::vector<std::vector<int>>& vertex_elements() const noexcept { return vertex_elements_; }

 private:
  SourceMesh() = default;
  void finalize();

  MeshSpec spec_;
  int dimension_ = 1;
  Vec areas_;
  SparseMat stiffness_;
  std::vector<Element> elements_;
  std::vector<std::vector<int>> vertex_elements_;
  Field positions_;
};

// Discrete operators. Fields are vertex-major (rows = vertices).

/// Laplace-Beltrami operator applied componentwise.
Field laplace_beltrami_apply(const SourceMesh& mesh, const Field& field);

/// Mass-weighted inner product sum_x area_x <u(x), v(x)>.
double l2_inner(const SourceMesh& mesh, const Field& u, const Field& v);

/// Plain L^p quadrature norm (pointwise Euclidean norm of each row).
double lp_norm(const SourceMesh& mesh, const Field& field, double p);

/// Discrete W^{k,p} norm for k in {0, 1, 2}. k = 1 adds |df|; k = 2 uses
/// |Laplacian f| as the second-order term.
double sobolev_norm(const SourceMesh& mesh, const Field& field, int k, double p);

/// Per-vertex |df|^2, the area average of the element gradients.
Vec energy_density(const SourceMesh& mesh, const Field& field);

/// Per-element gradient rows (rows x components) for each element.
Mat element_gradient(const Element& element, const Field& field);

/// ||f1 f2||_{L^2} / (||f1||_{W^{k,p}} ||f2||_{L^2}) for scalar fields.
/// Returns 0 when f2 vanishes.
double multiplication_ratio(const SourceMesh& mesh, const Vec& f1, const Vec& f2, int k, double p);

struct MultiplicationProbeLevel {
  int refinement = 0;
  int vertex_count = 0;
  double max_ratio = 0.0;
};

/// Estimates the norm of the multiplication map W^{k,p} x L^2 -> L^2 at each
/// refinement of `base` by maximizing the ratio over random band-limited
/// pairs. The same continuum fields are used at every level.
std::vector<MultiplicationProbeLevel> sobolev_multiplication_probe(
    const MeshSpec& base, const std::vector<int>& levels, int k, double p, int trials,
    std::uint64_t seed);

}  // namespace hmlab
