#include "hmlab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hmlab/error.hpp"

namespace hmlab {
namespace {

[[noreturn]] void fail(const std::string& msg) { throw LabError(ErrorCode::ConfigParse, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

// Strips a trailing comment that is not inside double quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) fail("key '" + key + "': cannot parse '" + text + "'");
  return value;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::string body = trim(raw);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') fail("unterminated list '" + raw + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Section = std::map<std::string, std::string>;

class Reader {
 public:
  Reader(const std::string& name, Section section) : name_(name), section_(std::move(section)) {}

  bool has(const std::string& key) const { return section_.count(key) > 0; }

  std::string text(const std::string& key) {
    used_.insert(key);
    return unquote(section_.at(key));
  }
  template <typename T>
  T number(const std::string& key) {
    return parse_number<T>(name_ + "." + key, text(key));
  }
  template <typename T>
  void maybe(const std::string& key, T& out) {
    if (has(key)) out = number<T>(key);
  }
  template <typename T>
  void maybe(const std::string& key, std::optional<T>& out) {
    if (has(key)) out = number<T>(key);
  }
  void maybe_text(const std::string& key, std::string& out) {
    if (has(key)) out = text(key);
  }
  std::vector<std::string> list(const std::string& key) {
    used_.insert(key);
    return split_list(section_.at(key));
  }

  /// Keys present but not consumed are errors.
  void finish() const {
    for (const auto& [key, value] : section_) {
      if (!used_.count(key)) fail("unknown or inapplicable key '" + key + "' in [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  Section section_;
  std::set<std::string> used_;
};

void parse_mesh(Reader r, MeshSpec& mesh) {
  if (!r.has("kind")) fail("[mesh] needs kind");
  const std::string kind = r.text("kind");
  if (kind == "circle") {
    mesh = MeshSpec::circle(128);
    r.maybe("n", mesh.n);
  } else if (kind == "flat_torus") {
    mesh = MeshSpec::flat_torus(32, 32, 0.0, 0.0);
    r.maybe("nu", mesh.nu);
    r.maybe("nv", mesh.nv);
    r.maybe("lu", mesh.lu);
    r.maybe("lv", mesh.lv);
  } else if (kind == "icosphere") {
    mesh = MeshSpec::icosphere(3);
    r.maybe("level", mesh.level);
  } else {
    fail("unknown mesh kind '" + kind + "'");
  }
  r.finish();
}

void parse_target(Reader r, TargetSpec& target) {
  if (!r.has("kind")) fail("[target] needs kind");
  const std::string kind = r.text("kind");
  if (kind == "sphere") {
    target.kind = TargetKind::UnitSphere;
    r.maybe("ambient_dim", target.ambient_dim);
  } else if (kind == "clifford_torus") {
    target.kind = TargetKind::CliffordTorus;
    r.maybe("circles", target.circles);
  } else if (kind == "torus_rev") {
    target.kind = TargetKind::TorusOfRevolution;
    r.maybe("R", target.major_radius);
    r.maybe("r", target.minor_radius);
  } else {
    fail("unknown target kind '" + kind + "'");
  }
  r.finish();
}

void parse_initial(Reader r, InitialSpec& init) {
  if (!r.has("kind")) fail("[initial] needs kind");
  const std::string kind = r.text("kind");
  auto read_point = [&] {
    if (r.has("point")) {
      init.point.clear();
      for (const std::string& item : r.list("point")) {
        init.point.push_back(parse_number<double>("initial.point", item));
      }
    }
  };
  if (kind == "constant") {
    init.kind = InitialKind::Constant;
    read_point();
  } else if (kind == "identity_sphere") {
    init.kind = InitialKind::IdentitySphere;
  } else if (kind == "degree_circle") {
    init.kind = InitialKind::DegreeCircle;
    r.maybe("degree", init.degree);
  } else if (kind == "perturbed_constant") {
    init.kind = InitialKind::PerturbedConstant;
    read_point();
    r.maybe("amplitude", init.amplitude);
  } else if (kind == "checkpoint") {
    init.kind = InitialKind::Checkpoint;
    if (!r.has("path")) fail("[initial] kind = checkpoint needs path");
    init.path = r.text("path");
  } else {
    fail("unknown initial kind '" + kind + "'");
  }
  r.finish();
}

void parse_flow(Reader r, FlowControl& flow) {
  r.maybe("dt0", flow.dt0);
  r.maybe("dt_min", flow.dt_min);
  r.maybe("max_steps", flow.max_steps);
  r.maybe("max_time", flow.max_time);
  r.maybe("grad_tol", flow.grad_tol);
  r.maybe("checkpoint_every", flow.checkpoint_every);
  r.finish();
}

void parse_analysis(Reader r, AnalysisSpec& a) {
  r.maybe("norm_k", a.norm_k);
  r.maybe("norm_p", a.norm_p);
  r.maybe_text("variant", a.variant);
  r.maybe("theta", a.theta);
  r.maybe("z", a.z);
  r.maybe("sigma", a.sigma);
  r.maybe("samples", a.samples);
  r.maybe("kernel_tol", a.kernel_tol);
  r.maybe_text("kernel_mode", a.kernel_mode);
  r.maybe("expected_critical_dim", a.expected_critical_dim);
  r.maybe("chart_radius", a.chart_radius);
  r.maybe("chart_samples", a.chart_samples);
  r.maybe("chart_k", a.chart_k);
  r.maybe("chart_p", a.chart_p);
  if (r.has("probe_levels")) {
    for (const std::string& item : r.list("probe_levels")) {
      a.probe_levels.push_back(parse_number<int>("analysis.probe_levels", item));
    }
  }
  r.maybe("probe_trials", a.probe_trials);
  r.maybe("probe_k", a.probe_k);
  r.maybe("probe_p", a.probe_p);
  r.maybe("hypothesis_dim", a.hypothesis_dim);
  if (a.kernel_mode != "relative" && a.kernel_mode != "gap") {
    fail("analysis.kernel_mode must be relative or gap");
  }
  if (a.variant != "L2" && a.variant != "Wk") fail("analysis.variant must be L2 or Wk");
  r.finish();
}

}  // namespace

EmbeddedTarget TargetSpec::build() const {
  switch (kind) {
    case TargetKind::UnitSphere: return EmbeddedTarget::unit_sphere(ambient_dim);
    case TargetKind::CliffordTorus: return EmbeddedTarget::clifford_torus(circles);
    case TargetKind::TorusOfRevolution:
      return EmbeddedTarget::torus_of_revolution(major_radius, minor_radius);
  }
  throw LabError(ErrorCode::InvalidSpec, "unknown target kind");
}

Scenario parse_scenario(const std::string& text) {
  static const std::set<std::string> sections = {"run",  "mesh",     "target",
                                                 "initial", "flow", "analysis"};
  std::map<std::string, Section> parsed;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') fail(where + "malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (!sections.count(current)) fail(where + "unknown section [" + current + "]");
      if (parsed.count(current)) fail(where + "duplicate section [" + current + "]");
      parsed[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(where + "expected key = value");
    if (current.empty()) fail(where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(where + "empty key");
    if (parsed[current].count(key)) fail(where + "duplicate key '" + key + "'");
    parsed[current][key] = value;
  }

  Scenario sc;
  sc.source_text = text;
  if (!parsed.count("run")) fail("missing [run] section");
  {
    Reader r("run", parsed["run"]);
    if (!r.has("seed")) fail("[run] needs seed");
    sc.seed = r.number<std::uint64_t>("seed");
    r.maybe_text("output_dir", sc.output_dir);
    if (r.has("experiments")) sc.experiments = r.list("experiments");
    r.finish();
  }
  for (const std::string& e : sc.experiments) {
    const auto& known = known_experiments();
    if (std::find(known.begin(), known.end(), e) == known.end()) {
      fail("unknown experiment '" + e + "'");
    }
  }
  if (!parsed.count("mesh")) fail("missing [mesh] section");
  parse_mesh(Reader("mesh", parsed["mesh"]), sc.mesh);
  if (!parsed.count("target")) fail("missing [target] section");
  parse_target(Reader("target", parsed["target"]), sc.target);
  if (parsed.count("initial")) parse_initial(Reader("initial", parsed["initial"]), sc.initial);
  if (parsed.count("flow")) parse_flow(Reader("flow", parsed["flow"]), sc.flow);
  if (parsed.count("analysis")) parse_analysis(Reader("analysis", parsed["analysis"]), sc.analysis);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LabError(ErrorCode::ConfigParse, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

TargetSpec parse_target_description(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  std::map<std::string, std::string> kv;
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw LabError(ErrorCode::ParseError, "bad target '" + text + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  TargetSpec spec;
  try {
    if (kind == "sphere") {
      spec.kind = TargetKind::UnitSphere;
      spec.ambient_dim = std::stoi(kv.at("ambient_dim"));
    } else if (kind == "clifford_torus") {
      spec.kind = TargetKind::CliffordTorus;
      spec.circles = std::stoi(kv.at("circles"));
    } else if (kind == "torus_rev") {
      spec.kind = TargetKind::TorusOfRevolution;
      spec.major_radius = parse_number<double>("R", kv.at("R"));
      spec.minor_radius = parse_number<double>("r", kv.at("r"));
    } else {
      throw LabError(ErrorCode::ParseError, "unknown target '" + text + "'");
    }
  } catch (const std::out_of_range&) {
    throw LabError(ErrorCode::ParseError, "incomplete target '" + text + "'");
  } catch (const std::invalid_argument&) {
    throw LabError(ErrorCode::ParseError, "bad target '" + text + "'");
  } catch (const LabError& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw LabError(ErrorCode::ParseError, "bad target '" + text + "'");
  }
  return spec;
}

MeshSpec parse_mesh_description(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  std::map<std::string, std::string> kv;
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw LabError(ErrorCode::ParseError, "bad mesh '" + text + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  try {
    if (kind == "circle") return MeshSpec::circle(std::stoi(kv.at("n")));
    if (kind == "icosphere") return MeshSpec::icosphere(std::stoi(kv.at("level")));
    if (kind == "flat_torus") {
      return MeshSpec::flat_torus(std::stoi(kv.at("nu")), std::stoi(kv.at("nv")),
                                  parse_number<double>("lu", kv.at("lu")),
                                  parse_number<double>("lv", kv.at("lv")));
    }
  } catch (const std::out_of_range&) {
    throw LabError(ErrorCode::ParseError, "incomplete mesh '" + text + "'");
  } catch (const std::invalid_argument&) {
    throw LabError(ErrorCode::ParseError, "bad mesh '" + text + "'");
  } catch (const LabError&) {
    throw LabError(ErrorCode::ParseError, "bad mesh '" + text + "'");
  }
  throw LabError(ErrorCode::ParseError, "unknown mesh '" + text + "'");
}

}  // namespace hmlab
