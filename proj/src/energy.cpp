#include "hmlab/energy.hpp"

#include <algorithm>
#include <cmath>

#include "hmlab/error.hpp"

namespace hmlab {
namespace {

void require_tangent(const MapField& f, const TangentField& v) {
  const double defect = tangency_defect(f, v.values);
  if (!(defect <= TangentField::kTangentTol)) {
    throw LabError(ErrorCode::NonTangentInput, "tangency defect " + std::to_string(defect));
  }
}

Field project_rows(const MapField& f, const Field& ambient) {
  return TangentField::project(f, ambient).values;
}

void require_chart_radius(const EmbeddedTarget& target, double sup, const char* what) {
  if (!(sup < 0.5 * target.tubular_radius())) {
    throw LabError(ErrorCode::ChartRadiusExceeded,
                   std::string(what) + ": displacement " + std::to_string(sup) +
                       " exceeds half the tubular radius");
  }
}

MapField push(const MapField& f, const Field& displacement) {
  Field values(f.vertex_count(), f.ambient_dim());
  for (int i = 0; i < values.rows(); ++i) {
    values.row(i) =
        f.target().project(f.point(i) + Vec(displacement.row(i).transpose())).transpose();
  }
  return f.with_values(std::move(values));
}

}  // namespace

double l2_norm(const SourceMesh& mesh, const Field& values) {
  return std::sqrt(std::max(0.0, l2_inner(mesh, values, values)));
}

double energy(const MapField& f) {
  return 0.5 * energy_density(f.mesh(), f.values()).dot(f.mesh().vertex_areas());
}

TangentField tension(const MapField& f) {
  return TangentField{project_rows(f, laplace_beltrami_apply(f.mesh(), f.values()))};
}

Field tension_via_sff(const MapField& f) {
  const SourceMesh& mesh = f.mesh();
  const EmbeddedTarget& target = f.target();
  // Edge form of the metric contraction: with L_xy = -w_xy,
  // A(df, df)(x) = 1/(2 area_x) sum_y w_xy A(v_xy, v_xy), where v_xy is the
  // log map of f_y at f_x. To third order, with B = d^2 pi and P d the
  // tangent part of f_y - f_x, v = P d + 1/6 sum_i <B(P d, e_i), B(P d, P d)> e_i.
  const SparseMat& stiff = mesh.stiffness();
  const std::vector<Mat> frames = tangent_frames(f);
  Field sff = Field::Zero(f.vertex_count(), f.ambient_dim());
  for (int col = 0; col < stiff.outerSize(); ++col) {
    for (SparseMat::InnerIterator it(stiff, col); it; ++it) {
      const int x = static_cast<int>(it.row());
      const int y = static_cast<int>(it.col());
      if (x == y) continue;
      const Vec fx = f.point(x);
      const Vec d = target.tangent_part(fx, f.point(y) - fx);
      const Vec normal = target.projection_hessian(fx, d, d);
      Vec v = d;
      for (int i = 0; i < frames[x].cols(); ++i) {
        const Vec e = frames[x].col(i);
        v += target.projection_hessian(fx, d, e).dot(normal) / 6.0 * e;
      }
      sff.row(x) += 0.5 * it.value() * target.projection_hessian(fx, v, v).transpose();
    }
  }
  Field out = laplace_beltrami_apply(mesh, f.values());
  const Vec& area = mesh.vertex_areas();
  for (int x = 0; x < out.rows(); ++x) out.row(x) -= sff.row(x) / area(x);
  return out;
}

double gradient_pairing_check(const MapField& f, const TangentField& u, double h_step) {
  if (!(h_step > 0.0)) throw LabError(ErrorCode::InvalidSpec, "h_step must be positive");
  require_chart_radius(f.target(), h_step * sup_norm(u.values), "gradient_pairing_check");
  const double e_plus = energy(push(f, h_step * u.values));
  const double e_minus = energy(push(f, -h_step * u.values));
  const double fd = (e_plus - e_minus) / (2.0 * h_step);
  return std::abs(fd - l2_inner(f.mesh(), u.values, tension(f).values));
}

TangentField hessian_apply(const MapField& f, const TangentField& v) {
  require_tangent(f, v);
  const SourceMesh& mesh = f.mesh();
  const EmbeddedTarget& target = f.target();
  const Field lap_f = laplace_beltrami_apply(mesh, f.values());
  const Field lap_v = laplace_beltrami_apply(mesh, v.values);
  const std::vector<Mat> frames = tangent_frames(f);
  Field out(f.vertex_count(), f.ambient_dim());
  for (int x = 0; x < out.rows(); ++x) {
    const Vec y = f.point(x);
    const Vec vx = v.values.row(x).transpose();
    const Vec lf = lap_f.row(x).transpose();
    Vec term = target.tangent_part(y, lap_v.row(x).transpose());
    const Mat& frame = frames[x];
    for (int i = 0; i < frame.cols(); ++i) {
      const Vec ei = frame.col(i);
      term += ei * target.projection_hessian(y, vx, ei).dot(lf);
    }
    out.row(x) = term.transpose();
  }
  return TangentField{std::move(out)};
}

Mat tangent_frame(const EmbeddedTarget& target, const Vec& y) {
  const int n = target.ambient_dim();
  const int m = target.intrinsic_dim();
  Mat cols = target.projection_jacobian(y);
  std::vector<bool> used(n, false);
  Mat frame(n, m);
  for (int a = 0; a < m; ++a) {
    int pivot = -1;
    double best = -1.0;
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double sq = cols.col(j).squaredNorm();
      if (sq > best) {
        best = sq;
        pivot = j;
      }
    }
    if (pivot < 0 || !(best > 1e-24)) {
      throw LabError(ErrorCode::EigensolveFailure, "tangent frame is rank deficient");
    }
    used[pivot] = true;
    const Vec e = cols.col(pivot) / std::sqrt(best);
    frame.col(a) = e;
    for (int j = 0; j < n; ++j) {
      if (!used[j]) cols.col(j) -= e * e.dot(cols.col(j));
    }
  }
  return frame;
}

std::vector<Mat> tangent_frames(const MapField& f) {
  std::vector<Mat> frames;
  frames.reserve(f.vertex_count());
  for (int x = 0; x < f.vertex_count(); ++x) frames.push_back(tangent_frame(f.target(), f.point(x)));
  return frames;
}

Field HessianMatrix::to_field(const Vec& coords) const {
  const int vertices = static_cast<int>(frames.size());
  const int n = vertices > 0 ? static_cast<int>(frames[0].rows()) : 0;
  const int m = vertices > 0 ? static_cast<int>(frames[0].cols()) : 0;
  if (coords.size() != vertices * m) {
    throw LabError(ErrorCode::ShapeMismatch, "coordinate vector has the wrong length");
  }
  Field out(vertices, n);
  for (int x = 0; x < vertices; ++x) {
    out.row(x) = (frames[x] * coords.segment(x * m, m)).transpose();
  }
  return out;
}

Vec HessianMatrix::to_coords(const Field& values) const {
  const int vertices = static_cast<int>(frames.size());
  const int m = vertices > 0 ? static_cast<int>(frames[0].cols()) : 0;
  if (values.rows() != vertices) {
    throw LabError(ErrorCode::ShapeMismatch, "field has the wrong number of rows");
  }
  Vec out(vertices * m);
  for (int x = 0; x < vertices; ++x) {
    out.segment(x * m, m) = frames[x].transpose() * values.row(x).transpose();
  }
  return out;
}

HessianMatrix hessian_matrix(const MapField& f) {
  const SourceMesh& mesh = f.mesh();
  const EmbeddedTarget& target = f.target();
  const int m = target.intrinsic_dim();
  const int vertices = f.vertex_count();

  HessianMatrix out;
  out.frames = tangent_frames(f);
  out.basis_dim = vertices * m;
  out.dof_mass.resize(out.basis_dim);
  const Vec& area = mesh.vertex_areas();
  for (int x = 0; x < vertices; ++x) out.dof_mass.segment(x * m, m).setConstant(area(x));
  const Vec scale = out.dof_mass.cwiseSqrt().cwiseInverse();

  // Bilinear form K(v, w) = <v, L w> + sum_x <d^2 pi(f_x)(v_x, w_x), (L f)_x>
  // in frame coordinates, then K -> D^{-1/2} K D^{-1/2}.
  const SparseMat& stiff = mesh.stiffness();
  const Field lap_f = stiff * f.values();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(stiff.nonZeros()) * m * m + vertices * m * m);
  for (int col = 0; col < stiff.outerSize(); ++col) {
    for (SparseMat::InnerIterator it(stiff, col); it; ++it) {
      const int x = static_cast<int>(it.row());
      const int y = static_cast<int>(it.col());
      const Mat block = out.frames[x].transpose() * out.frames[y] * it.value();
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          const int i = x * m + a;
          const int j = y * m + b;
          triplets.emplace_back(i, j, block(a, b) * scale(i) * scale(j));
        }
      }
    }
  }
  for (int x = 0; x < vertices; ++x) {
    const Vec y = f.point(x);
    const Vec lf = lap_f.row(x).transpose();
    const Mat& frame = out.frames[x];
    for (int b = 0; b < m; ++b) {
      // Derivative form: the ambient vector d^2 pi(e_b, L f) read against e_a.
      const Vec col = target.projection_hessian(y, frame.col(b), lf);
      for (int a = 0; a < m; ++a) {
        const int i = x * m + a;
        const int j = x * m + b;
        triplets.emplace_back(i, j, frame.col(a).dot(col) * scale(i) * scale(j));
      }
    }
  }
  SparseMat raw(out.basis_dim, out.basis_dim);
  raw.setFromTriplets(triplets.begin(), triplets.end());
  const SparseMat transposed = raw.transpose();
  const double norm = raw.norm();
  out.asymmetry = norm > 0.0 ? SparseMat(raw - transposed).norm() / norm : 0.0;
  out.matrix = 0.5 * (raw + transposed);
  return out;
}

TangentField tension_fixed_chart(const MapField& f_limit, const MapField& f) {
  if (f.vertex_count() != f_limit.vertex_count() || f.ambient_dim() != f_limit.ambient_dim()) {
    throw LabError(ErrorCode::ShapeMismatch, "maps live on different meshes or targets");
  }
  require_chart_radius(f_limit.target(), sup_norm(f.values() - f_limit.values()),
                       "tension_fixed_chart");
  const Field m = tension(f).values;
  return TangentField{project_rows(f_limit, m)};
}

}  // namespace hmlab
