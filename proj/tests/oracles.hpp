#pragma once

// Reference computations that do not go through the library's assembled
// operators. Each oracle is written from the defining formula.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hmlab/map_field.hpp"
#include "hmlab/mesh.hpp"

namespace oracle {

using hmlab::Field;
using hmlab::Vec;

/// Dirichlet energy of raw vertex values (not necessarily on the target).
/// Sphere: cotangent formula 1/4 sum_corners cot(angle) |f_j - f_k|^2 from the
/// vertex positions. Circle: fourth-order edge-midpoint differences.
/// FlatTorus: forward differences in each direction.
inline double raw_energy(const hmlab::SourceMesh& mesh, const Field& f) {
  const Field& pos = mesh.positions();
  double e = 0.0;
  switch (mesh.kind()) {
    case hmlab::MeshKind::RoundSphere:
      for (const auto& el : mesh.elements()) {
        for (int c = 0; c < 3; ++c) {
          const int i = el.vertices[c];
          const int j = el.vertices[(c + 1) % 3];
          const int k = el.vertices[(c + 2) % 3];
          const Eigen::Vector3d a = (pos.row(j) - pos.row(i)).transpose();
          const Eigen::Vector3d b = (pos.row(k) - pos.row(i)).transpose();
          const double cot = a.dot(b) / a.cross(b).norm();
          e += 0.25 * cot * (f.row(j) - f.row(k)).squaredNorm();
        }
      }
      return e;
    case hmlab::MeshKind::Circle: {
      const int n = mesh.vertex_count();
      const double h = 2.0 * M_PI / n;
      for (int i = 0; i < n; ++i) {
        const auto d = (f.row((i + n - 1) % n) - 27.0 * f.row(i) + 27.0 * f.row((i + 1) % n) -
                        f.row((i + 2) % n)) /
                       (24.0 * h);
        e += 0.5 * h * d.squaredNorm();
      }
      return e;
    }
    case hmlab::MeshKind::FlatTorus: {
      const int nu = mesh.spec().nu, nv = mesh.spec().nv;
      const double hu = mesh.spec().lu / nu, hv = mesh.spec().lv / nv;
      for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
          const auto x = f.row(i * nv + j);
          const auto du = (f.row(((i + 1) % nu) * nv + j) - x) / hu;
          const auto dv = (f.row(i * nv + (j + 1) % nv) - x) / hv;
          e += 0.5 * hu * hv * (du.squaredNorm() + dv.squaredNorm());
        }
      }
      return e;
    }
  }
  return e;
}

/// Central-difference gradient of a scalar function of a field.
inline Field fd_gradient(const std::function<double(const Field&)>& fn, const Field& f,
                         double h) {
  Field g(f.rows(), f.cols());
  Field work = f;
  for (int i = 0; i < f.rows(); ++i) {
    for (int c = 0; c < f.cols(); ++c) {
      const double saved = work(i, c);
      work(i, c) = saved + h;
      const double up = fn(work);
      work(i, c) = saved - h;
      const double down = fn(work);
      work(i, c) = saved;
      g(i, c) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

/// Tension from its definition: tangential part of the mass-normalized
/// ambient gradient of the energy, with the unit-sphere projector I - y y^T.
inline Field sphere_tension(const hmlab::SourceMesh& mesh, const Field& f) {
  const Field grad = fd_gradient([&](const Field& g) { return raw_energy(mesh, g); }, f, 1e-5);
  Field t(f.rows(), f.cols());
  for (int i = 0; i < f.rows(); ++i) {
    const Vec y = f.row(i).transpose();
    const Vec g = grad.row(i).transpose() / mesh.vertex_areas()(i);
    t.row(i) = (g - y * y.dot(g)).transpose();
  }
  return t;
}

/// Chart inverse on the unit sphere: the tangent u at y with (y + u)/|y + u| = y1.
inline Vec sphere_chart_inverse(const Vec& y, const Vec& y1) { return y1 / y.dot(y1) - y; }

/// |u| / |y - pi(y + u)| for a tangent u of length a at a point of the unit
/// sphere: a / sqrt(2 - 2 / sqrt(1 + a^2)).
inline double sphere_chart_ratio(double a) {
  return a / std::sqrt(2.0 - 2.0 / std::sqrt(1.0 + a * a));
}

/// Rotation of R^3 about a unit axis.
inline Eigen::Matrix3d rotation(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Hand-transcribed hypothesis clauses.
/// Wk: d >= 2, k >= 1, 1 < p < inf, kp > d.
/// L2, k = 1: d = 2 needs 2 < p; d = 3 needs 3 < p <= 6; d >= 4 excluded.
/// L2, k >= 2: p >= 2 and kp > d.
inline bool admissible_wk(int d, int k, double p) {
  return d >= 2 && k >= 1 && p > 1.0 && k * p > d;
}

inline bool admissible_l2(int d, int k, double p) {
  if (!admissible_wk(d, k, p)) return false;
  if (k == 1) {
    if (d == 2) return p > 2.0;
    if (d == 3) return p > 3.0 && p <= 6.0;
    return false;
  }
  return p >= 2.0;
}

}  // namespace oracle
