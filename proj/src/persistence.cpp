#include "hmlab/persistence.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <openssl/evp.h>

#include "hmlab/error.hpp"

namespace hmlab {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& path, const std::string& msg) {
  throw LabError(ErrorCode::ParseError, path + ": " + msg);
}

double parse_double(const std::string& path, const std::string& text) {
  if (text.empty()) parse_fail(path, "empty number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (errno == ERANGE || end != text.c_str() + text.size()) {
    parse_fail(path, "bad number '" + text + "'");
  }
  return v;
}

long parse_long(const std::string& path, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || errno == ERANGE || end != text.c_str() + text.size()) {
    parse_fail(path, "bad integer '" + text + "'");
  }
  return v;
}

// Reads "key = value" and checks the key.
std::string expect_field(std::istream& in, const std::string& path, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, "truncated before '" + key + "'");
  const auto eq = line.find(" = ");
  if (eq == std::string::npos || line.substr(0, eq) != key) {
    parse_fail(path, "expected '" + key + " = ...', got '" + line + "'");
  }
  return line.substr(eq + 3);
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LabError(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << content;
  out.close();
  if (!out) throw LabError(ErrorCode::Io, "write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LabError(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_checkpoint(const MapField& f, const CheckpointMeta& meta, const std::string& path) {
  std::string out;
  out += "hmlab-checkpoint\n";
  out += "format_version = " + std::to_string(kCheckpointFormatVersion) + "\n";
  out += "mesh = " + f.mesh().spec().describe() + "\n";
  out += "target = " + f.target().describe() + "\n";
  out += "step = " + std::to_string(meta.step) + "\n";
  out += "time = " + fmt17(meta.time) + "\n";
  out += "energy = " + fmt17(meta.energy) + "\n";
  out += "vertices = " + std::to_string(f.vertex_count()) + "\n";
  out += "ambient_dim = " + std::to_string(f.ambient_dim()) + "\n";
  out += "values\n";
  for (int i = 0; i < f.vertex_count(); ++i) {
    for (int c = 0; c < f.ambient_dim(); ++c) {
      if (c > 0) out += ' ';
      out += fmt17(f.values()(i, c));
    }
    out += '\n';
  }
  out += "end\n";
  write_text_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path, const std::optional<MeshSpec>& expected_mesh,
                           const std::optional<TargetSpec>& expected_target) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "hmlab-checkpoint") parse_fail(path, "missing header");
  const long version = parse_long(path, expect_field(in, path, "format_version"));
  if (version != kCheckpointFormatVersion) {
    throw LabError(ErrorCode::VersionError, path + ": format_version " + std::to_string(version) +
                                                ", expected " +
                                                std::to_string(kCheckpointFormatVersion));
  }
  const std::string mesh_text = expect_field(in, path, "mesh");
  const std::string target_text = expect_field(in, path, "target");
  CheckpointMeta meta;
  meta.step = parse_long(path, expect_field(in, path, "step"));
  meta.time = parse_double(path, expect_field(in, path, "time"));
  meta.energy = parse_double(path, expect_field(in, path, "energy"));
  const long vertices = parse_long(path, expect_field(in, path, "vertices"));
  const long dim = parse_long(path, expect_field(in, path, "ambient_dim"));
  if (!std::getline(in, line) || line != "values") parse_fail(path, "missing values marker");

  const MeshSpec mesh_spec = parse_mesh_description(mesh_text);
  const TargetSpec target_spec = parse_target_description(target_text);
  if (expected_mesh && expected_mesh->describe() != mesh_spec.describe()) {
    throw LabError(ErrorCode::SpecMismatch, path + ": mesh '" + mesh_text + "' differs from '" +
                                                expected_mesh->describe() + "'");
  }
  if (expected_target && !(*expected_target == target_spec)) {
    throw LabError(ErrorCode::SpecMismatch,
                   path + ": target '" + target_text + "' differs from the scenario target");
  }
  auto mesh = std::make_shared<const SourceMesh>(SourceMesh::build(mesh_spec));
  auto target = std::make_shared<const EmbeddedTarget>(target_spec.build());
  if (vertices != mesh->vertex_count() || dim != target->ambient_dim()) {
    throw LabError(ErrorCode::SpecMismatch, path + ": shape does not match the echoed specs");
  }
  Field values(vertices, dim);
  for (long i = 0; i < vertices; ++i) {
    if (!std::getline(in, line)) parse_fail(path, "truncated at row " + std::to_string(i));
    std::istringstream row(line);
    std::string tok;
    for (long c = 0; c < dim; ++c) {
      if (!(row >> tok)) parse_fail(path, "short row " + std::to_string(i));
      values(i, c) = parse_double(path, tok);
    }
    if (row >> tok) parse_fail(path, "long row " + std::to_string(i));
  }
  if (!std::getline(in, line) || line != "end") parse_fail(path, "missing end marker");
  return Checkpoint{MapField(std::move(mesh), std::move(target), std::move(values)), meta};
}

std::string trace_csv(const FlowTrace& trace) {
  if (trace.samples.empty()) throw LabError(ErrorCode::EmptyTrace, "trace has no samples");
  std::string out = "t,energy,grad_norm_l2,dist_to_limit,dt\n";
  for (const FlowSample& s : trace.samples) {
    out += fmt17(s.t) + "," + fmt17(s.energy) + "," + fmt17(s.grad_norm) + "," +
           (s.dist_to_limit ? fmt17(*s.dist_to_limit) : std::string()) + "," + fmt17(s.dt) + "\n";
  }
  return out;
}

void export_trace(const FlowTrace& trace, const std::string& path) {
  write_text_file(path, trace_csv(trace));
}

FlowTrace import_trace(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "t,energy,grad_norm_l2,dist_to_limit,dt") {
    parse_fail(path, "missing trace header");
  }
  FlowTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 5) parse_fail(path, "expected 5 columns in '" + line + "'");
    FlowSample s;
    s.t = parse_double(path, cells[0]);
    s.energy = parse_double(path, cells[1]);
    s.grad_norm = parse_double(path, cells[2]);
    if (!cells[3].empty()) s.dist_to_limit = parse_double(path, cells[3]);
    s.dt = parse_double(path, cells[4]);
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw LabError(ErrorCode::EmptyTrace, path + ": no samples");
  return trace;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw LabError(ErrorCode::Io, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

}  // namespace hmlab
