#include "hmlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmlab/energy.hpp"
#include "hmlab/error.hpp"

namespace hmlab {
namespace {

constexpr int kGrowthStreak = 5;
constexpr double kGrowthFactor = 1.25;
constexpr double kMaxDtFactor = 100.0;

MapField step_with(const MapField& f, const Field& m, double dt) {
  if (!(dt > 0.0)) throw LabError(ErrorCode::InvalidSpec, "flow step needs dt > 0");
  const double sup = dt * sup_norm(m);
  if (!(sup < 0.5 * f.target().tubular_radius())) {
    throw LabError(ErrorCode::ChartRadiusExceeded,
                   "flow step displacement " + std::to_string(sup) + " exceeds half the tube");
  }
  Field values(f.vertex_count(), f.ambient_dim());
  for (int i = 0; i < values.rows(); ++i) {
    values.row(i) = f.target().project(f.point(i) - dt * Vec(m.row(i).transpose())).transpose();
  }
  return f.with_values(std::move(values));
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::GradNormBelow: return "GradNormBelow";
    case Termination::MaxTime: return "MaxTime";
    case Termination::MaxSteps: return "MaxSteps";
    case Termination::StepCollapse: return "StepCollapse";
  }
  return "Unknown";
}

MapField flow_step(const MapField& f, double dt) { return step_with(f, tension(f).values, dt); }

FlowTrace run_flow(const MapField& f0, const FlowControl& control) {
  if (!(control.dt0 > 0.0) || !(control.dt_min > 0.0) || control.max_steps < 0 ||
      !(control.max_time >= 0.0) || !(control.grad_tol >= 0.0) || control.checkpoint_every < 0) {
    throw LabError(ErrorCode::InvalidSpec, "invalid flow control");
  }
  FlowTrace trace;
  trace.grad_tol = control.grad_tol;
  MapField f = f0;
  double e = energy(f);
  Field m = tension(f).values;
  double g = l2_norm(f.mesh(), m);
  double t = 0.0;
  double dt = control.dt0;
  const double dt_cap = kMaxDtFactor * control.dt0;
  int streak = 0;
  trace.samples.push_back({t, e, g, std::nullopt, 0.0});
  if (control.checkpoint_every > 0) trace.checkpoints.push_back({0, 0, f});

  while (true) {
    if (g <= control.grad_tol) {
      trace.terminated_by = Termination::GradNormBelow;
      break;
    }
    if (trace.accepted >= control.max_steps) {
      trace.terminated_by = Termination::MaxSteps;
      break;
    }
    if (t >= control.max_time) {
      trace.terminated_by = Termination::MaxTime;
      break;
    }
    std::optional<MapField> next;
    try {
      next = step_with(f, m, dt);
    } catch (const LabError& err) {
      if (err.code() != ErrorCode::ChartRadiusExceeded) throw;
    }
    bool accept = false;
    double e_next = e;
    Field m_next;
    double g_next = g;
    if (next) {
      e_next = energy(*next);
      m_next = tension(*next).values;
      g_next = l2_norm(next->mesh(), m_next);
      const double rounding =
          64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(e), 1.0);
      accept = e_next < e || (std::abs(e_next - e) <= rounding && g_next <= g);
    }
    if (!accept) {
      ++trace.rejected;
      streak = 0;
      dt *= 0.5;
      if (dt < control.dt_min) {
        trace.terminated_by = Termination::StepCollapse;
        break;
      }
      continue;
    }
    t += dt;
    f = std::move(*next);
    e = e_next;
    m = std::move(m_next);
    g = g_next;
    ++trace.accepted;
    trace.step_sizes.push_back(dt);
    trace.samples.push_back({t, e, g, std::nullopt, dt});
    if (control.checkpoint_every > 0 && trace.accepted % control.checkpoint_every == 0) {
      trace.checkpoints.push_back({trace.accepted, trace.samples.size() - 1, f});
    }
    if (++streak >= kGrowthStreak) {
      dt = std::min(kGrowthFactor * dt, dt_cap);
      streak = 0;
    }
  }
  trace.final_map = std::move(f);
  return trace;
}

void fill_dist_to_limit(FlowTrace& trace, int k, double p) {
  if (!trace.final_map || trace.samples.empty()) {
    throw LabError(ErrorCode::EmptyTrace, "trace has no final map");
  }
  const MapField& limit = *trace.final_map;
  for (const FlowCheckpoint& cp : trace.checkpoints) {
    trace.samples[cp.sample_index].dist_to_limit =
        sobolev_norm(limit.mesh(), cp.map.values() - limit.values(), k, p);
  }
  trace.samples.back().dist_to_limit = 0.0;
}

double dissipation_check(const FlowTrace& trace) {
  const auto& s = trace.samples;
  if (s.size() < 3) throw LabError(ErrorCode::InsufficientSamples, "dissipation needs 3 samples");
  // Differences below this multiple of the energy's rounding unit are noise;
  // they occur once the flow has settled at a critical point.
  constexpr double kResolvable = 1e4 * std::numeric_limits<double>::epsilon();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double de = s[i + 1].energy - s[i - 1].energy;
    if (std::abs(de) < kResolvable * std::abs(s[i].energy)) continue;
    const double dedt = de / (s[i + 1].t - s[i - 1].t);
    const double rate = s[i].grad_norm * s[i].grad_norm;
    const double diff = std::abs(dedt + rate);
    if (diff == 0.0) continue;
    worst = std::max(worst, rate > 0.0 ? diff / rate : std::numeric_limits<double>::infinity());
  }
  return worst;
}

}  // namespace hmlab
