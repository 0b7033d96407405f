#include "hmlab/charts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "hmlab/energy.hpp"
#include "hmlab/error.hpp"

namespace hmlab {
namespace {

void require_half_tube(const EmbeddedTarget& target, double sup, const char* what) {
  if (!(sup < 0.5 * target.tubular_radius())) {
    throw LabError(ErrorCode::ChartRadiusExceeded,
                   std::string(what) + ": sup norm " + std::to_string(sup) +
                       " is not below half the tubular radius");
  }
}

// Residual of pi(y + u) - y1, or infinity when y + u leaves the tube.
double residual_at(const EmbeddedTarget& target, const Vec& point, const Vec& y1, Vec& r) {
  if (!(target.distance(point) < target.tubular_radius())) {
    return std::numeric_limits<double>::infinity();
  }
  r = target.project(point) - y1;
  return r.norm();
}

}  // namespace

MapField chart_push(const MapField& f, const TangentField& u) {
  require_half_tube(f.target(), sup_norm(u.values), "chart_push");
  const double defect = tangency_defect(f, u.values);
  if (!(defect <= TangentField::kTangentTol)) {
    throw LabError(ErrorCode::NonTangentInput, "chart_push needs a tangent field");
  }
  Field values(f.vertex_count(), f.ambient_dim());
  for (int i = 0; i < values.rows(); ++i) {
    values.row(i) =
        f.target().project(f.point(i) + Vec(u.values.row(i).transpose())).transpose();
  }
  return f.with_values(std::move(values));
}

Vec chart_pull_point(const EmbeddedTarget& target, const Vec& y, const Vec& y1,
                     const NewtonSettings& settings) {
  const Mat frame = tangent_frame(target, y);
  const int n = target.ambient_dim();
  Vec c = frame.transpose() * (y1 - y);
  Vec r(n);
  double res = residual_at(target, y + frame * c, y1, r);
  for (int iter = 0; iter < settings.max_iterations && res > settings.converged; ++iter) {
    const Mat jac = target.projection_jacobian(y + frame * c) * frame;
    const Vec step = (jac.transpose() * jac).ldlt().solve(-jac.transpose() * r);
    double scale = 1.0;
    bool improved = false;
    Vec trial_r(n);
    for (int halving = 0; halving < 30; ++halving) {
      const Vec trial = c + scale * step;
      const double trial_res = residual_at(target, y + frame * trial, y1, trial_r);
      if (trial_res < res) {
        c = trial;
        r = trial_r;
        res = trial_res;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }
  if (!(res <= settings.accept)) {
    throw LabError(ErrorCode::NewtonDivergence,
                   "chart inverse residual " + std::to_string(res) + " after Newton");
  }
  return frame * c;
}

TangentField chart_pull(const MapField& f, const MapField& f1) {
  if (f.vertex_count() != f1.vertex_count() || f.ambient_dim() != f1.ambient_dim()) {
    throw LabError(ErrorCode::ShapeMismatch, "chart_pull maps differ in shape");
  }
  require_half_tube(f.target(), sup_norm(f1.values() - f.values()), "chart_pull");
  Field out(f.vertex_count(), f.ambient_dim());
  for (int i = 0; i < out.rows(); ++i) {
    out.row(i) = chart_pull_point(f.target(), f.point(i), f1.point(i)).transpose();
  }
  return TangentField{std::move(out)};
}

ChartReport bilipschitz_estimate(const MapField& f, double radius, int samples, int k, double p,
                                 std::uint64_t seed) {
  if (!(radius > 0.0)) throw LabError(ErrorCode::InvalidSpec, "chart radius must be positive");
  if (!(radius < 0.5 * f.target().tubular_radius())) {
    throw LabError(ErrorCode::ChartRadiusExceeded, "chart radius must stay below delta_0 / 2");
  }
  if (samples < 1) throw LabError(ErrorCode::InvalidSpec, "chart audit needs samples >= 1");
  const SourceMesh& mesh = f.mesh();
  ChartReport report;
  report.radius_used = radius;
  report.norm_k = k;
  report.norm_p = p;
  report.min_ratio = std::numeric_limits<double>::infinity();
  report.max_ratio = 0.0;
  const Rng root(seed, "chart-audit");
  for (int s = 0; s < samples; ++s) {
    Rng rng = root.substream(static_cast<std::uint64_t>(s));
    TangentField u = random_tangent_field(f, rng);
    const double fraction = rng.uniform();
    const double norm = sobolev_norm(mesh, u.values, k, p);
    if (!(norm > 0.0)) continue;
    u.values *= fraction * radius / norm;
    const MapField pushed = chart_push(f, u);
    const double u_norm = sobolev_norm(mesh, u.values, k, p);
    const double d_norm = sobolev_norm(mesh, pushed.values() - f.values(), k, p);
    if (!(d_norm > 0.0)) continue;
    const double ratio = u_norm / d_norm;
    report.min_ratio = std::min(report.min_ratio, ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
    const TangentField back = chart_pull(f, pushed);
    report.max_roundtrip_error =
        std::max(report.max_roundtrip_error, sup_norm(back.values - u.values));
    ++report.sample_count;
  }
  if (report.sample_count == 0) {
    throw LabError(ErrorCode::InsufficientSamples, "no usable chart samples");
  }
  report.c4_estimate = std::max({report.max_ratio, 1.0 / report.min_ratio, 1.0});
  return report;
}

std::string ChartReport::to_json() const {
  nlohmann::ordered_json j;
  j["c4_estimate"] = c4_estimate;
  j["max_roundtrip_error"] = max_roundtrip_error;
  j["sample_count"] = sample_count;
  j["radius_used"] = radius_used;
  j["min_ratio"] = min_ratio;
  j["max_ratio"] = max_ratio;
  j["norm"] = {{"k", norm_k}, {"p", norm_p}};
  return j.dump(2);
}

}  // namespace hmlab
