#include "hmlab/target.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hmlab/error.hpp"

namespace hmlab {
namespace {

// Radial normalization x -> x/|x| and its derivatives; every target here is
// assembled from this map by composition.
Vec normalize(const Vec& x) { return x / x.norm(); }

Mat normalize_jacobian(const Vec& x) {
  const double r = x.norm();
  const Vec xh = x / r;
  return (Mat::Identity(x.size(), x.size()) - xh * xh.transpose()) / r;
}

Vec normalize_jacobian_apply(const Vec& x, const Vec& v) {
  const double r = x.norm();
  const Vec xh = x / r;
  return (v - xh * xh.dot(v)) / r;
}

Vec normalize_hessian(const Vec& x, const Vec& v, const Vec& w) {
  const double r = x.norm();
  const Vec xh = x / r;
  const double xv = xh.dot(v);
  const double xw = xh.dot(w);
  return (-v * xw - w * xv - xh * v.dot(w) + 3.0 * xh * xv * xw) / (r * r);
}

Vec planar(const Vec& x) {
  Vec s = x;
  s(2) = 0.0;
  return s;
}

}  // namespace

EmbeddedTarget EmbeddedTarget::unit_sphere(int ambient_dim) {
  if (ambient_dim < 2) {
    throw LabError(ErrorCode::InvalidSpec, "unit sphere needs ambient_dim >= 2");
  }
  EmbeddedTarget t;
  t.kind_ = TargetKind::UnitSphere;
  t.ambient_dim_ = ambient_dim;
  t.intrinsic_dim_ = ambient_dim - 1;
  t.tubular_radius_ = 1.0;
  return t;
}

EmbeddedTarget EmbeddedTarget::clifford_torus(int circles) {
  if (circles < 1) {
    throw LabError(ErrorCode::InvalidSpec, "clifford torus needs at least one circle");
  }
  EmbeddedTarget t;
  t.kind_ = TargetKind::CliffordTorus;
  t.ambient_dim_ = 2 * circles;
  t.intrinsic_dim_ = circles;
  t.tubular_radius_ = 1.0;
  return t;
}

EmbeddedTarget EmbeddedTarget::torus_of_revolution(double major_radius, double minor_radius) {
  if (!(minor_radius > 0.0) || !(major_radius > minor_radius)) {
    throw LabError(ErrorCode::InvalidSpec, "torus of revolution needs R > r > 0");
  }
  EmbeddedTarget t;
  t.kind_ = TargetKind::TorusOfRevolution;
  t.ambient_dim_ = 3;
  t.intrinsic_dim_ = 2;
  t.major_radius_ = major_radius;
  t.minor_radius_ = minor_radius;
  // Focal points: the tube axis at distance r, the symmetry axis at R - r.
  t.tubular_radius_ = std::min(minor_radius, major_radius - minor_radius);
  return t;
}

void EmbeddedTarget::require_dim(const Vec& x) const {
  if (x.size() != ambient_dim_) {
    throw LabError(ErrorCode::ShapeMismatch, "point has dimension " + std::to_string(x.size()) +
                                                 ", target ambient dimension is " +
                                                 std::to_string(ambient_dim_));
  }
}

void EmbeddedTarget::require_on_target(const Vec& y) const {
  require_dim(y);
  const double res = residual(y);
  if (!(res <= kOnTargetTol)) {
    throw LabError(ErrorCode::NotOnTarget, "residual " + std::to_string(res));
  }
}

double EmbeddedTarget::distance(const Vec& x) const {
  require_dim(x);
  switch (kind_) {
    case TargetKind::UnitSphere:
      return std::abs(x.norm() - 1.0);
    case TargetKind::CliffordTorus: {
      double sum = 0.0;
      for (int i = 0; i < intrinsic_dim_; ++i) {
        const double d = x.segment<2>(2 * i).norm() - 1.0;
        sum += d * d;
      }
      return std::sqrt(sum);
    }
    case TargetKind::TorusOfRevolution: {
      const double rho = std::hypot(x(0), x(1));
      return std::abs(std::hypot(rho - major_radius_, x(2)) - minor_radius_);
    }
  }
  return 0.0;
}

double EmbeddedTarget::residual(const Vec& y) const {
  require_dim(y);
  switch (kind_) {
    case TargetKind::UnitSphere:
      return std::abs(y.norm() - 1.0);
    case TargetKind::CliffordTorus: {
      double worst = 0.0;
      for (int i = 0; i < intrinsic_dim_; ++i) {
        worst = std::max(worst, std::abs(y.segment<2>(2 * i).norm() - 1.0));
      }
      return worst;
    }
    case TargetKind::TorusOfRevolution:
      return distance(y);
  }
  return 0.0;
}

Vec EmbeddedTarget::project(const Vec& x) const {
  const double dist = distance(x);
  if (!(dist < tubular_radius_)) {
    throw LabError(ErrorCode::OutsideTubularNeighborhood,
                   "distance " + std::to_string(dist) + " >= " + std::to_string(tubular_radius_));
  }
  switch (kind_) {
    case TargetKind::UnitSphere:
      return normalize(x);
    case TargetKind::CliffordTorus: {
      Vec y(x.size());
      for (int i = 0; i < intrinsic_dim_; ++i) {
        y.segment<2>(2 * i) = x.segment<2>(2 * i).normalized();
      }
      return y;
    }
    case TargetKind::TorusOfRevolution: {
      const Vec core = major_radius_ * normalize(planar(x));
      return core + minor_radius_ * normalize(Vec(x - core));
    }
  }
  return x;
}

Mat EmbeddedTarget::projection_jacobian(const Vec& x) const {
  require_dim(x);
  switch (kind_) {
    case TargetKind::UnitSphere:
      return normalize_jacobian(x);
    case TargetKind::CliffordTorus: {
      Mat jac = Mat::Zero(ambient_dim_, ambient_dim_);
      for (int i = 0; i < intrinsic_dim_; ++i) {
        jac.block<2, 2>(2 * i, 2 * i) = normalize_jacobian(x.segment<2>(2 * i));
      }
      return jac;
    }
    case TargetKind::TorusOfRevolution: {
      const int n = ambient_dim_;
      Mat planar_proj = Mat::Identity(n, n);
      planar_proj(2, 2) = 0.0;
      const Vec s = planar(x);
      const Vec core = major_radius_ * normalize(s);
      const Mat d_core = major_radius_ * normalize_jacobian(s) * planar_proj;
      const Vec q = x - core;
      const Mat d_q = Mat::Identity(n, n) - d_core;
      return d_core + minor_radius_ * normalize_jacobian(q) * d_q;
    }
  }
  return Mat();
}

Vec EmbeddedTarget::projection_hessian(const Vec& x, const Vec& v, const Vec& w) const {
  require_dim(x);
  require_dim(v);
  require_dim(w);
  switch (kind_) {
    case TargetKind::UnitSphere:
      return normalize_hessian(x, v, w);
    case TargetKind::CliffordTorus: {
      Vec out(ambient_dim_);
      for (int i = 0; i < intrinsic_dim_; ++i) {
        out.segment<2>(2 * i) =
            normalize_hessian(x.segment<2>(2 * i), v.segment<2>(2 * i), w.segment<2>(2 * i));
      }
      return out;
    }
    case TargetKind::TorusOfRevolution: {
      // pi = c + r N(x - c) with c = R N(S x); second-order chain rule.
      const Vec s = planar(x);
      const Vec sv = planar(v);
      const Vec sw = planar(w);
      const Vec core = major_radius_ * normalize(s);
      const Vec d_core_v = major_radius_ * normalize_jacobian_apply(s, sv);
      const Vec d_core_w = major_radius_ * normalize_jacobian_apply(s, sw);
      const Vec dd_core = major_radius_ * normalize_hessian(s, sv, sw);
      const Vec q = x - core;
      const Vec dq_v = v - d_core_v;
      const Vec dq_w = w - d_core_w;
      return dd_core + minor_radius_ * (normalize_hessian(q, dq_v, dq_w) +
                                        normalize_jacobian_apply(q, Vec(-dd_core)));
    }
  }
  return Vec();
}

Mat EmbeddedTarget::tangent_projector(const Vec& y) const {
  require_on_target(y);
  return projection_jacobian(y);
}

Vec EmbeddedTarget::tangent_part(const Vec& y, const Vec& v) const {
  switch (kind_) {
    case TargetKind::UnitSphere:
      return v - y * (y.dot(v) / y.squaredNorm());
    case TargetKind::CliffordTorus: {
      Vec out(ambient_dim_);
      for (int i = 0; i < intrinsic_dim_; ++i) {
        const Eigen::Vector2d yi = y.segment<2>(2 * i);
        const Eigen::Vector2d vi = v.segment<2>(2 * i);
        out.segment<2>(2 * i) = vi - yi * (yi.dot(vi) / yi.squaredNorm());
      }
      return out;
    }
    case TargetKind::TorusOfRevolution: {
      const Vec core = major_radius_ * normalize(planar(y));
      const Vec normal = normalize(Vec(y - core));
      return v - normal * normal.dot(v);
    }
  }
  return v;
}

Vec EmbeddedTarget::ambient_hessian_of_projection(const Vec& y, const Vec& v, const Vec& w) const {
  require_on_target(y);
  return projection_hessian(y, v, w);
}

Vec EmbeddedTarget::second_fundamental_form(const Vec& y, const Vec& v, const Vec& w) const {
  require_on_target(y);
  require_dim(v);
  require_dim(w);
  const double tol_v = kTangentTol * std::max(1.0, v.norm());
  const double tol_w = kTangentTol * std::max(1.0, w.norm());
  if ((tangent_part(y, v) - v).norm() > tol_v || (tangent_part(y, w) - w).norm() > tol_w) {
    throw LabError(ErrorCode::NonTangentInput, "second fundamental form needs tangent inputs");
  }
  return -projection_hessian(y, v, w);
}

std::string EmbeddedTarget::describe() const {
  char buf[128];
  switch (kind_) {
    case TargetKind::UnitSphere:
      std::snprintf(buf, sizeof buf, "sphere ambient_dim=%d", ambient_dim_);
      break;
    case TargetKind::CliffordTorus:
      std::snprintf(buf, sizeof buf, "clifford_torus circles=%d", intrinsic_dim_);
      break;
    case TargetKind::TorusOfRevolution:
      std::snprintf(buf, sizeof buf, "torus_rev R=%.17g r=%.17g", major_radius_, minor_radius_);
      break;
  }
  return buf;
}

}  // namespace hmlab
