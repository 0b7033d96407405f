#include "hmlab/map_field.hpp"

#include <algorithm>
#include <cmath>

#include "hmlab/error.hpp"

namespace hmlab {

MapField::MapField(MeshPtr mesh, TargetPtr target, Field values)
    : mesh_(std::move(mesh)), target_(std::move(target)), values_(std::move(values)) {
  if (!mesh_ || !target_) throw LabError(ErrorCode::InvalidSpec, "map needs a mesh and a target");
  if (values_.rows() != mesh_->vertex_count() || values_.cols() != target_->ambient_dim()) {
    throw LabError(ErrorCode::ShapeMismatch, "map values do not match mesh and target");
  }
  for (int i = 0; i < values_.rows(); ++i) {
    const Vec y = values_.row(i).transpose();
    const double dist = target_->distance(y);
    if (!(dist <= kOnTargetTol)) {
      throw LabError(ErrorCode::OffTarget,
                     "vertex " + std::to_string(i) + " is " + std::to_string(dist) + " off target");
    }
  }
}

double tangency_defect(const MapField& base, const Field& values) {
  if (values.rows() != base.vertex_count() || values.cols() != base.ambient_dim()) {
    throw LabError(ErrorCode::ShapeMismatch, "tangent field shape does not match base map");
  }
  double worst = 0.0;
  for (int i = 0; i < values.rows(); ++i) {
    const Vec u = values.row(i).transpose();
    worst = std::max(worst, (base.target().tangent_part(base.point(i), u) - u).norm());
  }
  return worst;
}

double sup_norm(const Field& values) {
  return values.rows() == 0 ? 0.0 : values.rowwise().norm().maxCoeff();
}

TangentField TangentField::checked(const MapField& base, Field values) {
  const double defect = tangency_defect(base, values);
  if (!(defect <= kTangentTol)) {
    throw LabError(ErrorCode::NonTangentInput, "tangency defect " + std::to_string(defect));
  }
  return TangentField{std::move(values)};
}

TangentField TangentField::project(const MapField& base, const Field& ambient) {
  if (ambient.rows() != base.vertex_count() || ambient.cols() != base.ambient_dim()) {
    throw LabError(ErrorCode::ShapeMismatch, "ambient field shape does not match base map");
  }
  Field out(ambient.rows(), ambient.cols());
  for (int i = 0; i < ambient.rows(); ++i) {
    out.row(i) = base.target().tangent_part(base.point(i), ambient.row(i).transpose()).transpose();
  }
  return TangentField{std::move(out)};
}

TangentField TangentField::zero(const MapField& base) {
  return TangentField{Field::Zero(base.vertex_count(), base.ambient_dim())};
}

MapField constant_map(MeshPtr mesh, TargetPtr target, const Vec& point) {
  const int n = mesh->vertex_count();
  Field values(n, point.size());
  for (int i = 0; i < n; ++i) values.row(i) = point.transpose();
  return MapField(std::move(mesh), std::move(target), std::move(values));
}

MapField identity_map(MeshPtr mesh, TargetPtr target) {
  const bool sphere_target = target->kind() == TargetKind::UnitSphere;
  const bool round = mesh->kind() == MeshKind::RoundSphere && target->ambient_dim() == 3;
  const bool circle = mesh->kind() == MeshKind::Circle && target->ambient_dim() == 2;
  if (!sphere_target || !(round || circle)) {
    throw LabError(ErrorCode::InvalidSpec,
                   "identity map needs icosphere -> sphere(3) or circle -> sphere(2)");
  }
  Field values = mesh->positions();
  return MapField(std::move(mesh), std::move(target), std::move(values));
}

MapField degree_circle_map(MeshPtr mesh, TargetPtr target, int degree) {
  if (mesh->kind() != MeshKind::Circle || target->kind() != TargetKind::UnitSphere ||
      target->ambient_dim() != 2) {
    throw LabError(ErrorCode::InvalidSpec, "degree map needs circle -> sphere(2)");
  }
  const int n = mesh->vertex_count();
  Field values(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = degree * mesh->angle(i);
    values(i, 0) = std::cos(t);
    values(i, 1) = std::sin(t);
  }
  return MapField(std::move(mesh), std::move(target), std::move(values));
}

TangentField random_tangent_field(const MapField& f, Rng& rng, int modes) {
  const Field basis = f.mesh().band_limited_modes(modes);
  Mat coeffs(modes, f.ambient_dim());
  for (int c = 0; c < f.ambient_dim(); ++c) {
    for (int m = 0; m < modes; ++m) coeffs(m, c) = rng.normal();
  }
  return TangentField::project(f, Field(basis * coeffs));
}

MapField perturbed_map(const MapField& base, double amplitude, Rng& rng) {
  TangentField u = random_tangent_field(base, rng);
  const double sup = sup_norm(u.values);
  if (sup > 0.0) u.values *= amplitude / sup;
  Field values(base.vertex_count(), base.ambient_dim());
  for (int i = 0; i < values.rows(); ++i) {
    values.row(i) =
        base.target().project(base.point(i) + Vec(u.values.row(i).transpose())).transpose();
  }
  return base.with_values(std::move(values));
}

}  // namespace hmlab
