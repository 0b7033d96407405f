#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmlab/flow.hpp"
#include "hmlab/mesh.hpp"
#include "hmlab/target.hpp"

namespace hmlab {

struct TargetSpec {
  TargetKind kind = TargetKind::UnitSphere;
  int ambient_dim = 3;
  int circles = 2;
  double major_radius = 2.0;
  double minor_radius = 1.0;

  EmbeddedTarget build() const;
  bool operator==(const TargetSpec&) const = default;
};

enum class InitialKind { Constant, IdentitySphere, DegreeCircle, PerturbedConstant, Checkpoint };

struct InitialSpec {
  InitialKind kind = InitialKind::Constant;
  std::vector<double> point;   // empty: last ambient basis vector
  double amplitude = 0.1;
  int degree = 1;
  std::string path;
};

struct AnalysisSpec {
  int norm_k = 2;
  double norm_p = 2.0;
  std::string variant = "L2";
  double theta = 0.5;
  double z = 1.0;
  double sigma = 0.1;
  int samples = 64;
  std::optional<double> kernel_tol;
  std::string kernel_mode = "relative";   // relative | gap
  std::optional<int> expected_critical_dim;
  double chart_radius = 0.1;
  int chart_samples = 32;
  int chart_k = 1;
  double chart_p = 2.0;
  std::vector<int> probe_levels;            // empty: kind-dependent default
  int probe_trials = 32;
  int probe_k = 2;
  double probe_p = 2.0;
  std::optional<int> hypothesis_dim;        // overrides the mesh dimension in checks
};

/// Experiments in the order they run.
inline const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names = {"flow",   "loja-fit",    "hessian-spec",
                                                 "verify", "chart-audit", "mult-probe"};
  return names;
}

struct Scenario {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::vector<std::string> experiments;
  MeshSpec mesh;
  TargetSpec target;
  InitialSpec initial;
  FlowControl flow;
  AnalysisSpec analysis;
  std::string source_text;   // verbatim configuration
};

/// Strict parser for the sectioned key = value format. Unknown sections or
/// keys, duplicate keys, malformed values and a missing seed raise ConfigParse.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Inverse of EmbeddedTarget::describe.
TargetSpec parse_target_description(const std::string& text);
/// Inverse of MeshSpec::describe.
MeshSpec parse_mesh_description(const std::string& text);

}  // namespace hmlab
