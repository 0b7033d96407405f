#include "hmlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <memory>

#include <json.hpp>

#include "hmlab/charts.hpp"
#include "hmlab/energy.hpp"
#include "hmlab/flow.hpp"
#include "hmlab/lojasiewicz.hpp"
#include "hmlab/persistence.hpp"

namespace hmlab {
namespace fs = std::filesystem;
namespace {

using Json = nlohmann::ordered_json;

bool wants(const std::vector<std::string>& list, const std::string& name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

MapField build_initial(const Scenario& sc, const MeshPtr& mesh, const TargetPtr& target) {
  const InitialSpec& init = sc.initial;
  auto point = [&] {
    Vec p = Vec::Zero(target->ambient_dim());
    if (init.point.empty()) {
      if (target->kind() == TargetKind::UnitSphere) {
        p(p.size() - 1) = 1.0;
      } else if (target->kind() == TargetKind::CliffordTorus) {
        for (int i = 0; i < p.size(); i += 2) p(i) = 1.0;
      } else {
        p(0) = target->major_radius() + target->minor_radius();
      }
      return p;
    }
    if (static_cast<int>(init.point.size()) != target->ambient_dim()) {
      throw LabError(ErrorCode::InvalidSpec, "initial.point has the wrong dimension");
    }
    for (int i = 0; i < p.size(); ++i) p(i) = init.point[i];
    if (!target->on_target(p)) throw LabError(ErrorCode::InvalidSpec, "initial.point is off target");
    return p;
  };
  switch (init.kind) {
    case InitialKind::Constant:
      return constant_map(mesh, target, point());
    case InitialKind::IdentitySphere:
      return identity_map(mesh, target);
    case InitialKind::DegreeCircle:
      return degree_circle_map(mesh, target, init.degree);
    case InitialKind::PerturbedConstant: {
      Rng rng(sc.seed, "initial");
      return perturbed_map(constant_map(mesh, target, point()), init.amplitude, rng);
    }
    case InitialKind::Checkpoint:
      return load_checkpoint(init.path, sc.mesh, sc.target).map;
  }
  throw LabError(ErrorCode::InvalidSpec, "unknown initial map kind");
}

std::vector<int> probe_levels(const Scenario& sc) {
  if (!sc.analysis.probe_levels.empty()) return sc.analysis.probe_levels;
  switch (sc.mesh.kind) {
    case MeshKind::Circle: return {64, 128, 256};
    case MeshKind::FlatTorus: return {16, 32, 64};
    case MeshKind::RoundSphere: return {2, 3, 4};
  }
  return {};
}

class OutputWriter {
 public:
  explicit OutputWriter(std::string dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    write_text_file((fs::path(dir_) / name).string(), content);
    files_.push_back(name);
  }
  void checkpoint(const std::string& name, const MapField& f, const CheckpointMeta& meta) {
    save_checkpoint(f, meta, (fs::path(dir_) / name).string());
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

void run_experiments(const Scenario& sc, const std::vector<std::string>& experiments,
                     OutputWriter& out) {
  const AnalysisSpec& an = sc.analysis;
  auto mesh = std::make_shared<const SourceMesh>(SourceMesh::build(sc.mesh));
  auto target = std::make_shared<const EmbeddedTarget>(sc.target.build());

  // Hypotheses are checked before any computation.
  ExponentCheck hypothesis;
  if (wants(experiments, "verify")) {
    const int d = an.hypothesis_dim.value_or(mesh->dimension());
    hypothesis = validate_exponents(d, an.norm_k, an.norm_p, parse_variant(an.variant));
    if (!hypothesis.admissible) {
      throw LabError(ErrorCode::InadmissibleExponents, hypothesis.reason);
    }
  }

  const MapField initial = build_initial(sc, mesh, target);
  MapField limit = initial;
  std::optional<FlowTrace> trace;
  if (wants(experiments, "flow") || wants(experiments, "loja-fit")) {
    trace = run_flow(initial, sc.flow);
    fill_dist_to_limit(*trace, std::min(an.norm_k, 2), an.norm_p);
    limit = *trace->final_map;
    out.write("trace.csv", trace_csv(*trace));
    const FlowSample& last = trace->samples.back();
    out.checkpoint("final.ckpt", limit, {trace->accepted, last.t, last.energy});
    Json j;
    j["terminated_by"] = to_string(trace->terminated_by);
    j["accepted_steps"] = trace->accepted;
    j["rejected_steps"] = trace->rejected;
    j["final_time"] = last.t;
    j["final_energy"] = last.energy;
    j["final_grad_norm_l2"] = last.grad_norm;
    j["initial_energy"] = trace->samples.front().energy;
    if (trace->samples.size() >= 3) j["dissipation_residual"] = dissipation_check(*trace);
    out.write("flow_summary.json", j.dump(2) + "\n");
  }

  if (wants(experiments, "loja-fit")) {
    const LojasiewiczFit fit = fit_exponent(*trace);
    out.write("loja_fit.json", fit.to_json() + "\n");
    const ConvergenceReport conv = convergence_classifier(*trace);
    out.write("convergence.json", conv.to_json() + "\n");
  }

  if (wants(experiments, "hessian-spec")) {
    SpectrumOptions opts;
    opts.kernel_tol = an.kernel_tol;
    opts.mode = an.kernel_mode == "gap" ? KernelTolMode::Gap : KernelTolMode::Relative;
    const MorseBottReport report =
        morse_bott_report(limit, an.expected_critical_dim, opts, sc.flow.grad_tol);
    out.write("hessian_spectrum.json", report.spectrum.to_json() + "\n");
    out.write("morse_bott.json", report.to_json() + "\n");
  }

  if (wants(experiments, "verify")) {
    const std::vector<MapField> samples =
        sample_neighborhood(limit, an.sigma, an.samples, an.norm_k, an.norm_p, sc.seed);
    GradientNorm norm;
    if (parse_variant(an.variant) == InequalityVariant::Wk) {
      norm.kind = GradientNorm::Kind::WkMinus2p;
      norm.k = an.norm_k;
      norm.p = an.norm_p;
    }
    const InequalityReport report = verify_inequality(samples, limit, an.theta, an.z, norm);
    out.write("verify.csv", report.to_csv());
    Json j = Json::parse(report.to_json());
    j["hypothesis"] = hypothesis.reason;
    out.write("verify.json", j.dump(2) + "\n");
  }

  if (wants(experiments, "chart-audit")) {
    const ChartReport report = bilipschitz_estimate(limit, an.chart_radius, an.chart_samples,
                                                    an.chart_k, an.chart_p, sc.seed);
    out.write("chart_report.json", report.to_json() + "\n");
  }

  if (wants(experiments, "mult-probe")) {
    const auto rows = sobolev_multiplication_probe(sc.mesh, probe_levels(sc), an.probe_k,
                                                   an.probe_p, an.probe_trials, sc.seed);
    Json j;
    j["k"] = an.probe_k;
    j["p"] = an.probe_p;
    j["trials"] = an.probe_trials;
    Json levels = Json::array();
    double lo = 0.0, hi = 0.0;
    for (const auto& row : rows) {
      levels.push_back(
          {{"refinement", row.refinement}, {"vertices", row.vertex_count}, {"max_ratio", row.max_ratio}});
      lo = lo == 0.0 ? row.max_ratio : std::min(lo, row.max_ratio);
      hi = std::max(hi, row.max_ratio);
    }
    j["levels"] = levels;
    j["band_factor"] = lo > 0.0 ? hi / lo : 0.0;
    out.write("mult_probe.json", j.dump(2) + "\n");
  }
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigParse:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InadmissibleExponents:
    case ErrorCode::InvalidExponents:
    case ErrorCode::UnsupportedOrder:
    case ErrorCode::VersionError:
    case ErrorCode::ParseError:
    case ErrorCode::SpecMismatch:
    case ErrorCode::Io:
      return 2;
    default:
      return 3;
  }
}

std::string resolve_output_dir(const Scenario& scenario, const RunOptions& options) {
  if (options.output_dir) return *options.output_dir;
  if (const char* root = std::getenv("HMLAB_OUTPUT_ROOT"); root && *root) {
    return (fs::path(root) / scenario.output_dir).string();
  }
  return scenario.output_dir;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.output_dir = resolve_output_dir(scenario, options);
  const std::vector<std::string> experiments = options.experiments.value_or(scenario.experiments);

  std::error_code ec;
  fs::create_directories(result.output_dir, ec);
  if (ec) {
    result.exit_code = 2;
    result.error = "cannot create output directory '" + result.output_dir + "': " + ec.message();
    return result;
  }
  OutputWriter out(result.output_dir);
  try {
    for (const std::string& e : experiments) {
      if (!wants(known_experiments(), e)) {
        throw LabError(ErrorCode::ConfigParse, "unknown experiment '" + e + "'");
      }
    }
    run_experiments(scenario, experiments, out);
  } catch (const LabError& e) {
    result.exit_code = exit_code_for(e.code());
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = 3;
    result.error = e.what();
  }
  result.files = out.files();

  Json manifest;
  manifest["tool"] = "hmlab";
  manifest["version"] = kToolVersion;
  manifest["seed"] = scenario.seed;
  manifest["threads"] = options.threads;
  manifest["experiments"] = experiments;
  manifest["mesh"] = scenario.mesh.describe();
  manifest["config"] = scenario.source_text;
  manifest["exit_code"] = result.exit_code;
  manifest["status"] = result.exit_code == 0 ? "ok" : "failed";
  if (!result.error.empty()) manifest["error"] = result.error;
  Json files = Json::array();
  try {
    for (const std::string& name : result.files) {
      const std::string path = (fs::path(result.output_dir) / name).string();
      files.push_back({{"path", name},
                       {"sha256", sha256_file(path)},
                       {"bytes", static_cast<std::uint64_t>(fs::file_size(path))}});
    }
  } catch (const std::exception& e) {
    if (result.exit_code == 0) result.exit_code = 2;
    result.error = e.what();
  }
  manifest["files"] = files;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_text_file((fs::path(result.output_dir) / "manifest.json").string(),
                    manifest.dump(2) + "\n");
  } catch (const LabError& e) {
    if (result.exit_code == 0) result.exit_code = 2;
    result.error = e.what();
  }
  return result;
}

RunResult run_scenario_file(const std::string& config_path, const RunOptions& options) {
  try {
    return run_scenario(load_scenario(config_path), options);
  } catch (const LabError& e) {
    RunResult result;
    result.exit_code = exit_code_for(e.code());
    result.error = e.what();
    return result;
  }
}

}  // namespace hmlab
