#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmlab/map_field.hpp"

namespace hmlab {

/// Explicit projected Euler step f -> pi(f - dt M(f)).
/// Requires dt > 0 and dt |M(f)|_inf < delta_0 / 2.
MapField flow_step(const MapField& f, double dt);

struct FlowControl {
  double dt0 = 1e-3;
  double dt_min = 1e-12;
  long max_steps = 100000;
  double max_time = 10.0;
  double grad_tol = 1e-9;      // stop once |M(f)|_{L^2} <= grad_tol
  int checkpoint_every = 100;  // accepted steps between stored maps, 0 disables
};

enum class Termination { GradNormBelow, MaxTime, MaxSteps, StepCollapse };

std::string to_string(Termination t);

struct FlowSample {
  double t = 0.0;
  double energy = 0.0;
  double grad_norm = 0.0;                // |M(f)|_{L^2}
  std::optional<double> dist_to_limit;   // filled for stored maps after the run
  double dt = 0.0;                       // step that produced the sample, 0 first
};

struct FlowCheckpoint {
  long step = 0;
  std::size_t sample_index = 0;
  MapField map;
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  std::vector<double> step_sizes;
  Termination terminated_by = Termination::MaxSteps;
  double grad_tol = 0.0;
  std::vector<FlowCheckpoint> checkpoints;
  std::optional<MapField> final_map;
  long accepted = 0;
  long rejected = 0;
};

/// Adaptive driver. A step is accepted iff the energy decreases (a change
/// within rounding of the energy is accepted when |M| does not grow). A
/// rejection or a chart violation halves dt; dt below dt_min ends the run with
/// StepCollapse. Five accepted steps in a row grow dt by 1.25, capped at
/// 100 dt0. Every accepted step is sampled.
FlowTrace run_flow(const MapField& f0, const FlowControl& control);

/// Distance of each stored map (and the final one) to the final iterate in
/// the discrete W^{k,p} norm.
void fill_dist_to_limit(FlowTrace& trace, int k, double p);

/// Largest relative residual of dE/dt = -|M|^2 over interior samples, with
/// dE/dt from centred differences. 0/0 counts as 0.
/// Throws InsufficientSamples for fewer than three samples.
double dissipation_check(const FlowTrace& trace);

}  // namespace hmlab
