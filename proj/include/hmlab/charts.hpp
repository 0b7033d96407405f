#pragma once

#include <cstdint>
#include <string>

#include "hmlab/map_field.hpp"

namespace hmlab {

/// u -> pi(f + u). Requires |u|_inf < delta_0 / 2 and u tangent along f.
MapField chart_push(const MapField& f, const TangentField& u);

/// Inverse of chart_push: the tangent field u with pi(f + u) = f1, found per
/// vertex by damped Gauss-Newton in frame coordinates.
/// Throws ChartRadiusExceeded when |f - f1|_inf >= delta_0 / 2 and
/// NewtonDivergence when a vertex does not converge.
TangentField chart_pull(const MapField& f, const MapField& f1);

struct NewtonSettings {
  int max_iterations = 50;
  double converged = 1e-12;   // stop once |pi(y + u) - y1| falls below this
  double accept = 1e-10;      // final residual bound
};

/// Single-vertex inverse: tangent u at y with pi(y + u) = y1.
Vec chart_pull_point(const EmbeddedTarget& target, const Vec& y, const Vec& y1,
                     const NewtonSettings& settings = {});

struct ChartReport {
  double c4_estimate = 1.0;
  double max_roundtrip_error = 0.0;
  int sample_count = 0;
  double radius_used = 0.0;
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  int norm_k = 1;
  double norm_p = 2.0;

  std::string to_json() const;
};

/// Empirical bi-Lipschitz constant of the chart at f: over `samples` seeded
/// band-limited tangent fields u with |u|_{W^{k,p}} uniform in (0, radius],
/// the extremes of |u| / |f - chart_push(f, u)| in the same norm.
ChartReport bilipschitz_estimate(const MapField& f, double radius, int samples, int k, double p,
                                 std::uint64_t seed);

}  // namespace hmlab
