#pragma once

#include <optional>
#include <string>

#include "hmlab/flow.hpp"
#include "hmlab/map_field.hpp"
#include "hmlab/scenario.hpp"

namespace hmlab {

struct CheckpointMeta {
  long step = 0;
  double time = 0.0;
  double energy = 0.0;
};

struct Checkpoint {
  MapField map;
  CheckpointMeta meta;
};

inline constexpr int kCheckpointFormatVersion = 1;

/// Text checkpoint: header, mesh and target echoes, metadata, then one row of
/// 17-significant-digit ambient coordinates per vertex and an end marker.
void save_checkpoint(const MapField& f, const CheckpointMeta& meta, const std::string& path);

/// Rebuilds mesh and target from the echoes. When `expected_mesh` or
/// `expected_target` is given, a different echo raises SpecMismatch.
/// Errors: Io, VersionError, ParseError (malformed or truncated), OffTarget.
Checkpoint load_checkpoint(const std::string& path,
                           const std::optional<MeshSpec>& expected_mesh = {},
                           const std::optional<TargetSpec>& expected_target = {});

/// CSV `t,energy,grad_norm_l2,dist_to_limit,dt`, %.17g, missing distances
/// left empty. Throws EmptyTrace for a trace without samples.
std::string trace_csv(const FlowTrace& trace);
void export_trace(const FlowTrace& trace, const std::string& path);
/// Reads a trace CSV back (samples only).
FlowTrace import_trace(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Lower-case hex SHA-256 of a byte string and of a file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace hmlab
