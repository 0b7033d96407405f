#pragma once

#include <memory>

#include "hmlab/mesh.hpp"
#include "hmlab/rng.hpp"
#include "hmlab/target.hpp"
#include "hmlab/types.hpp"

namespace hmlab {

using MeshPtr = std::shared_ptr<const SourceMesh>;
using TargetPtr = std::shared_ptr<const EmbeddedTarget>;

/// A discrete map M -> N stored through the embedding N in R^n: one ambient
/// point per vertex. Construction enforces the on-target invariant.
class MapField {
 public:
  MapField(MeshPtr mesh, TargetPtr target, Field values);

  const SourceMesh& mesh() const noexcept { return *mesh_; }
  const EmbeddedTarget& target() const noexcept { return *target_; }
  const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
  const TargetPtr& target_ptr() const noexcept { return target_; }
  const Field& values() const noexcept { return values_; }
  int vertex_count() const noexcept { return static_cast<int>(values_.rows()); }
  int ambient_dim() const noexcept { return static_cast<int>(values_.cols()); }
  Vec point(int vertex) const { return values_.row(vertex).transpose(); }

  /// Same mesh and target, new values (validated).
  MapField with_values(Field values) const { return MapField(mesh_, target_, std::move(values)); }

  static constexpr double kOnTargetTol = 1e-9;

 private:
  MeshPtr mesh_;
  TargetPtr target_;
  Field values_;
};

/// Vertexwise tangent vectors along a base map. The field does not keep a
/// reference to its base; the factories check tangency against the map they
/// are given.
struct TangentField {
  Field values;

  /// Validates u(x) in T_{f(x)} N at every vertex (throws NonTangentInput).
  static TangentField checked(const MapField& base, Field values);
  /// Pointwise tangential projection of an ambient field.
  static TangentField project(const MapField& base, const Field& ambient);
  static TangentField zero(const MapField& base);

  static constexpr double kTangentTol = 1e-8;
};

/// Largest pointwise deviation |P u - u| over the vertices.
double tangency_defect(const MapField& base, const Field& values);

/// Largest pointwise Euclidean norm.
double sup_norm(const Field& values);

// Common maps.
MapField constant_map(MeshPtr mesh, TargetPtr target, const Vec& point);
/// Identity of the round sphere (mesh vertices on S^2 into UnitSphere(3)), or
/// of the circle (into UnitSphere(2)).
MapField identity_map(MeshPtr mesh, TargetPtr target);
/// theta -> (cos k theta, sin k theta) from the circle into UnitSphere(2).
MapField degree_circle_map(MeshPtr mesh, TargetPtr target, int degree);

/// Band-limited random tangent field along f: ambient components drawn from
/// the lowest `modes` mesh eigenfunctions with standard normal coefficients,
/// then projected tangentially.
TangentField random_tangent_field(const MapField& f, Rng& rng, int modes = 8);

/// pi(base + amplitude * u / |u|_inf) for a random band-limited tangent u.
MapField perturbed_map(const MapField& base, double amplitude, Rng& rng);

}  // namespace hmlab
