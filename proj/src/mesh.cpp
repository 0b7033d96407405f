#include "hmlab/mesh.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "hmlab/error.hpp"
#include "hmlab/rng.hpp"

namespace hmlab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Element edge_element(int a, int b, double length, double measure) {
  Element e;
  e.vertices = {a, b};
  e.gradient.resize(1, 2);
  e.gradient << -1.0 / length, 1.0 / length;
  e.measure = measure;
  e.share = 0.5 * measure;
  return e;
}

// Fourth-order derivative at the midpoint of edge (b, c), from the stencil
// a, b, c, d. Its symbol (2 s + s^3 / 3) / h with s = sin(theta / 2) is
// positive for every nonconstant mode, so the kernel stays the constants.
Element wide_edge_element(int a, int b, int c, int d, double h) {
  Element e;
  e.vertices = {a, b, c, d};
  e.gradient.resize(1, 4);
  e.gradient << 1.0, -27.0, 27.0, -1.0;
  e.gradient /= 24.0 * h;
  e.measure = h;
  e.share = 0.25 * h;
  return e;
}

Element triangle_element(const Field& pos, int a, int b, int c) {
  const Eigen::Vector3d pa = pos.row(a).transpose();
  const Eigen::Vector3d ab = pos.row(b).transpose() - pa;
  const Eigen::Vector3d ac = pos.row(c).transpose() - pa;
  const Eigen::Vector3d e1 = ab.normalized();
  const Eigen::Vector3d e2 = (ac - e1 * e1.dot(ac)).normalized();
  Eigen::Matrix2d edges;
  edges << ab.dot(e1), ab.dot(e2), ac.dot(e1), ac.dot(e2);
  Eigen::Matrix<double, 2, 3> diff;
  diff << -1.0, 1.0, 0.0, -1.0, 0.0, 1.0;
  Element e;
  e.vertices = {a, b, c};
  e.gradient = edges.inverse() * diff;
  e.measure = 0.5 * ab.cross(ac).norm();
  e.share = e.measure / 3.0;
  return e;
}

// Area of the geodesic triangle with unit-vector corners (Van Oosterom-Strackee).
double spherical_triangle_area(const Field& pos, int a, int b, int c) {
  const Eigen::Vector3d pa = pos.row(a).transpose();
  const Eigen::Vector3d pb = pos.row(b).transpose();
  const Eigen::Vector3d pc = pos.row(c).transpose();
  const double triple = std::abs(pa.dot(pb.cross(pc)));
  return 2.0 * std::atan2(triple, 1.0 + pa.dot(pb) + pb.dot(pc) + pc.dot(pa));
}

struct Icosphere {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
};

Icosphere build_icosphere(int level) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  Icosphere ico;
  const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& p : raw) ico.vertices.push_back(Eigen::Vector3d(p[0], p[1], p[2]).normalized());
  ico.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(ico.vertices.size());
      ico.vertices.push_back((ico.vertices[a] + ico.vertices[b]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(ico.faces.size() * 4);
    for (const auto& f : ico.faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    ico.faces = std::move(next);
  }
  return ico;
}

}  // namespace

MeshSpec MeshSpec::circle(int n) {
  MeshSpec s;
  s.kind = MeshKind::Circle;
  s.n = n;
  return s;
}

MeshSpec MeshSpec::flat_torus(int nu, int nv, double lu, double lv) {
  MeshSpec s;
  s.kind = MeshKind::FlatTorus;
  s.nu = nu;
  s.nv = nv;
  s.lu = lu;
  s.lv = lv;
  return s;
}

MeshSpec MeshSpec::icosphere(int level) {
  MeshSpec s;
  s.kind = MeshKind::RoundSphere;
  s.level = level;
  return s;
}

MeshSpec MeshSpec::refined(int refinement) const {
  MeshSpec s = *this;
  switch (kind) {
    case MeshKind::Circle: s.n = refinement; break;
    case MeshKind::FlatTorus: s.nu = s.nv = refinement; break;
    case MeshKind::RoundSphere: s.level = refinement; break;
  }
  return s;
}

std::string MeshSpec::describe() const {
  char buf[160];
  switch (kind) {
    case MeshKind::Circle:
      std::snprintf(buf, sizeof buf, "circle n=%d", n);
      break;
    case MeshKind::FlatTorus:
      std::snprintf(buf, sizeof buf, "flat_torus nu=%d nv=%d lu=%.17g lv=%.17g", nu, nv,
                    lu > 0 ? lu : kTwoPi, lv > 0 ? lv : kTwoPi);
      break;
    case MeshKind::RoundSphere:
      std::snprintf(buf, sizeof buf, "icosphere level=%d", level);
      break;
  }
  return buf;
}

int SourceMesh::refinement_level() const noexcept {
  switch (spec_.kind) {
    case MeshKind::Circle: return spec_.n;
    case MeshKind::FlatTorus: return spec_.nu;
    case MeshKind::RoundSphere: return spec_.level;
  }
  return 0;
}

SourceMesh SourceMesh::build(const MeshSpec& spec) {
  SourceMesh mesh;
  mesh.spec_ = spec;
  switch (spec.kind) {
    case MeshKind::Circle: {
      if (spec.n < 8) throw LabError(ErrorCode::InvalidSpec, "circle needs n >= 8");
      const int n = spec.n;
      const double h = kTwoPi / n;
      mesh.dimension_ = 1;
      mesh.positions_.resize(n, 2);
      for (int i = 0; i < n; ++i) {
        const double t = h * i;
        mesh.positions_(i, 0) = std::cos(t);
        mesh.positions_(i, 1) = std::sin(t);
        mesh.elements_.push_back(
            wide_edge_element((i + n - 1) % n, i, (i + 1) % n, (i + 2) % n, h));
      }
      mesh.areas_ = Vec::Constant(n, h);
      break;
    }
    case MeshKind::FlatTorus: {
      if (spec.nu < 8 || spec.nv < 8) {
        throw LabError(ErrorCode::InvalidSpec, "flat torus needs nu, nv >= 8");
      }
      const double lu = spec.lu > 0 ? spec.lu : kTwoPi;
      const double lv = spec.lv > 0 ? spec.lv : kTwoPi;
      mesh.spec_.lu = lu;
      mesh.spec_.lv = lv;
      const int nu = spec.nu, nv = spec.nv;
      const double hu = lu / nu, hv = lv / nv;
      mesh.dimension_ = 2;
      mesh.positions_.resize(nu * nv, 2);
      auto id = [nv](int i, int j) { return i * nv + j; };
      for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
          mesh.positions_(id(i, j), 0) = hu * i;
          mesh.positions_(id(i, j), 1) = hv * j;
          // Each direction's difference quotients cover the cell once.
          mesh.elements_.push_back(edge_element(id(i, j), id((i + 1) % nu, j), hu, hu * hv));
          mesh.elements_.push_back(edge_element(id(i, j), id(i, (j + 1) % nv), hv, hu * hv));
        }
      }
      mesh.areas_ = Vec::Constant(nu * nv, hu * hv);
      break;
    }
    case MeshKind::RoundSphere: {
      if (spec.level < 0 || spec.level > 7) {
        throw LabError(ErrorCode::InvalidSpec, "icosphere level must be in 0..7");
      }
      const Icosphere ico = build_icosphere(spec.level);
      const int n = static_cast<int>(ico.vertices.size());
      mesh.dimension_ = 2;
      mesh.positions_.resize(n, 3);
      for (int i = 0; i < n; ++i) mesh.positions_.row(i) = ico.vertices[i].transpose();
      mesh.areas_ = Vec::Zero(n);
      for (const auto& f : ico.faces) {
        // Lumped mass from the geodesic faces, so constants integrate exactly
        // over the round sphere; the stiffness uses the flat faces.
        Element e = triangle_element(mesh.positions_, f[0], f[1], f[2]);
        const double third = spherical_triangle_area(mesh.positions_, f[0], f[1], f[2]) / 3.0;
        for (int v : e.vertices) mesh.areas_(v) += third;
        mesh.elements_.push_back(std::move(e));
      }
      break;
    }
  }
  mesh.finalize();
  return mesh;
}

void SourceMesh::finalize() {
  const int n = vertex_count();
  vertex_elements_.assign(n, {});
  std::vector<Eigen::Triplet<double>> triplets;
  for (int e = 0; e < static_cast<int>(elements_.size()); ++e) {
    const Element& el = elements_[e];
    const Mat local = el.measure * el.gradient.transpose() * el.gradient;
    for (int a = 0; a < static_cast<int>(el.vertices.size()); ++a) {
      vertex_elements_[el.vertices[a]].push_back(e);
      for (int b = 0; b < static_cast<int>(el.vertices.size()); ++b) {
        triplets.emplace_back(el.vertices[a], el.vertices[b], local(a, b));
      }
    }
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(triplets.begin(), triplets.end());
  stiffness_.makeCompressed();
}

double SourceMesh::angle(int vertex) const {
  if (spec_.kind != MeshKind::Circle) {
    throw LabError(ErrorCode::InvalidSpec, "angle() is only defined on the circle");
  }
  return kTwoPi * vertex / spec_.n;
}

Field SourceMesh::band_limited_modes(int count) const {
  if (count < 0 || count > kMaxModes) {
    throw LabError(ErrorCode::InvalidSpec, "band_limited_modes supports at most 9 modes");
  }
  const int n = vertex_count();
  Field modes(n, count);
  for (int i = 0; i < n; ++i) {
    std::array<double, kMaxModes> row{};
    switch (spec_.kind) {
      case MeshKind::Circle: {
        const double t = angle(i);
        row = {1.0,
               std::cos(t),
               std::sin(t),
               std::cos(2 * t),
               std::sin(2 * t),
               std::cos(3 * t),
               std::sin(3 * t),
               std::cos(4 * t),
               std::sin(4 * t)};
        break;
      }
      case MeshKind::FlatTorus: {
        const double a = kTwoPi * positions_(i, 0) / spec_.lu;
        const double b = kTwoPi * positions_(i, 1) / spec_.lv;
        row = {1.0,
               std::cos(a),
               std::sin(a),
               std::cos(b),
               std::sin(b),
               std::cos(a) * std::cos(b),
               std::cos(a) * std::sin(b),
               std::sin(a) * std::cos(b),
               std::sin(a) * std::sin(b)};
        break;
      }
      case MeshKind::RoundSphere: {
        const double x = positions_(i, 0), y = positions_(i, 1), z = positions_(i, 2);
        row = {1.0, x, y, z, x * y, y * z, z * x, x * x - y * y, 3 * z * z - 1};
        break;
      }
    }
    for (int c = 0; c < count; ++c) modes(i, c) = row[c];
  }
  return modes;
}

namespace {

void require_rows(const SourceMesh& mesh, const Field& field) {
  if (field.rows() != mesh.vertex_count()) {
    throw LabError(ErrorCode::ShapeMismatch, "field has " + std::to_string(field.rows()) +
                                                 " rows, mesh has " +
                                                 std::to_string(mesh.vertex_count()) + " vertices");
  }
}

double pow_sum(const SourceMesh& mesh, const Vec& pointwise_abs, double p) {
  double sum = 0.0;
  const Vec& area = mesh.vertex_areas();
  for (int i = 0; i < pointwise_abs.size(); ++i) sum += area(i) * std::pow(pointwise_abs(i), p);
  return sum;
}

}  // namespace

Field laplace_beltrami_apply(const SourceMesh& mesh, const Field& field) {
  require_rows(mesh, field);
  Field out = mesh.stiffness() * field;
  const Vec& area = mesh.vertex_areas();
  for (int i = 0; i < out.rows(); ++i) out.row(i) /= area(i);
  return out;
}

double l2_inner(const SourceMesh& mesh, const Field& u, const Field& v) {
  require_rows(mesh, u);
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw LabError(ErrorCode::ShapeMismatch, "l2_inner operands differ in shape");
  }
  const Vec& area = mesh.vertex_areas();
  double sum = 0.0;
  for (int i = 0; i < u.rows(); ++i) sum += area(i) * u.row(i).dot(v.row(i));
  return sum;
}

double lp_norm(const SourceMesh& mesh, const Field& field, double p) {
  require_rows(mesh, field);
  if (!(p >= 1.0)) throw LabError(ErrorCode::InvalidExponents, "L^p needs p >= 1");
  return std::pow(pow_sum(mesh, field.rowwise().norm(), p), 1.0 / p);
}

double sobolev_norm(const SourceMesh& mesh, const Field& field, int k, double p) {
  if (k < 0 || k > 2) {
    throw LabError(ErrorCode::UnsupportedOrder, "sobolev_norm supports k in {0, 1, 2}");
  }
  if (k == 0) return lp_norm(mesh, field, p);
  if (!(p >= 1.0)) throw LabError(ErrorCode::InvalidExponents, "W^{k,p} needs p >= 1");
  double sum = pow_sum(mesh, field.rowwise().norm(), p);
  sum += pow_sum(mesh, energy_density(mesh, field).cwiseSqrt(), p);
  if (k == 2) sum += pow_sum(mesh, laplace_beltrami_apply(mesh, field).rowwise().norm(), p);
  return std::pow(sum, 1.0 / p);
}

Mat element_gradient(const Element& element, const Field& field) {
  Mat local(element.vertices.size(), field.cols());
  for (std::size_t a = 0; a < element.vertices.size(); ++a) {
    local.row(a) = field.row(element.vertices[a]);
  }
  return element.gradient * local;
}

Vec energy_density(const SourceMesh& mesh, const Field& field) {
  require_rows(mesh, field);
  Vec density = Vec::Zero(mesh.vertex_count());
  for (const Element& el : mesh.elements()) {
    const double sq = element_gradient(el, field).squaredNorm();
    for (int v : el.vertices) density(v) += el.share * sq;
  }
  density.array() /= mesh.vertex_areas().array();
  return density;
}

double multiplication_ratio(const SourceMesh& mesh, const Vec& f1, const Vec& f2, int k, double p) {
  const double f2_norm = lp_norm(mesh, Field(f2), 2.0);
  if (f2_norm == 0.0) return 0.0;
  const Field product = Field(f1.cwiseProduct(f2));
  return lp_norm(mesh, product, 2.0) / (sobolev_norm(mesh, Field(f1), k, p) * f2_norm);
}

std::vector<MultiplicationProbeLevel> sobolev_multiplication_probe(
    const MeshSpec& base, const std::vector<int>& levels, int k, double p, int trials,
    std::uint64_t seed) {
  if (k > 2) throw LabError(ErrorCode::UnsupportedOrder, "probe supports k <= 2");
  const int d = base.kind == MeshKind::Circle ? 1 : 2;
  const bool multiplication_range = k >= 2 && p >= 2.0 && k * p > d;
  const bool first_order_range = k == 1 && p > 1.0 && k * p > d;
  if (!multiplication_range && !first_order_range) {
    throw LabError(ErrorCode::InvalidExponents,
                   "probe needs k >= 2, p >= 2, kp > d (or k = 1, p > 1, kp > d)");
  }
  if (trials < 1) throw LabError(ErrorCode::InvalidSpec, "probe needs trials >= 1");
  constexpr int kModes = 8;
  const Rng root(seed, "mult-probe");
  std::vector<MultiplicationProbeLevel> out;
  for (int level : levels) {
    const SourceMesh mesh = SourceMesh::build(base.refined(level));
    const Field modes = mesh.band_limited_modes(kModes);
    MultiplicationProbeLevel row;
    row.refinement = level;
    row.vertex_count = mesh.vertex_count();
    for (int t = 0; t < trials; ++t) {
      Rng rng = root.substream(static_cast<std::uint64_t>(t));
      Vec c1(kModes), c2(kModes);
      for (int i = 0; i < kModes; ++i) c1(i) = rng.normal();
      for (int i = 0; i < kModes; ++i) c2(i) = rng.normal();
      const Vec f1 = modes * c1;
      const Vec f2 = modes * c2;
      row.max_ratio = std::max(row.max_ratio, multiplication_ratio(mesh, f1, f2, k, p));
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace hmlab
