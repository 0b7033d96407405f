// Command-line front end: scenario runs, single experiments and the exponent
// hypothesis table.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hmlab/lojasiewicz.hpp"
#include "hmlab/runner.hpp"

namespace {

int report(const hmlab::RunResult& result) {
  if (!result.output_dir.empty()) std::cout << "output: " << result.output_dir << "\n";
  for (const std::string& f : result.files) std::cout << "  " << f << "\n";
  if (result.exit_code != 0) std::cerr << "error: " << result.error << "\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hmlab: harmonic map energy, gradient flow and gradient inequality experiments"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> output_dir;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", output_dir, "output directory (overrides config and env)");
    sub->add_option("--threads", threads, "worker threads (computation is single-threaded)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "run every experiment listed in the scenario");
  add_common(run);

  std::string selected;
  for (const std::string& name : hmlab::known_experiments()) {
    CLI::App* sub = app.add_subcommand(name, "run only the '" + name + "' experiment");
    add_common(sub);
    sub->callback([&selected, name] { selected = name; });
  }

  int d = 0, k = 0;
  double p = 0.0;
  std::string variant;
  CLI::App* validate =
      app.add_subcommand("validate-exponents", "check (d, k, p) against the inequality hypotheses");
  validate->add_option("d", d, "source dimension")->required();
  validate->add_option("k", k, "Sobolev order")->required();
  validate->add_option("p", p, "Sobolev exponent")->required();
  validate->add_option("variant", variant, "Wk or L2")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors count as configuration rejections; --help stays 0.
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (validate->parsed()) {
    try {
      const auto check = hmlab::validate_exponents(d, k, p, hmlab::parse_variant(variant));
      std::cout << (check.admissible ? "admissible" : "inadmissible") << ": " << check.reason
                << "\n";
      return check.admissible ? 0 : 2;
    } catch (const hmlab::LabError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return hmlab::exit_code_for(e.code());
    }
  }

  hmlab::RunOptions options;
  options.output_dir = output_dir;
  options.threads = threads;
  if (!selected.empty()) options.experiments = std::vector<std::string>{selected};
  return report(hmlab::run_scenario_file(config, options));
}
