#pragma once

#include <cstdint>
#include <string>

#include "records.hpp"
#include "spec.hpp"

namespace tonsim::cli {

std::string_view tool_version();

struct ResultEnvelope {
  std::string tool_version;
  std::string config_digest;
  std::uint64_t base_seed = 0;
  double wall_time = 0.0;
  Table payload;
  /// Resolved spec, echoed into the metadata.
  std::string spec_text;
  /// Every record came from a search that hit its floor or ceiling.
  bool all_flagged = false;
};

/// Dispatches to the library. Records are in a fixed order that does not
/// depend on `spec.jobs`.
ResultEnvelope run_command(const ExperimentSpec& spec);

/// Metadata as one JSON object (tool_version, config_digest, base_seed,
/// seed derivation, record count, wall_time, resolved spec).
std::string envelope_metadata(const ExperimentSpec& spec, const ResultEnvelope& envelope);

/// Runs the command and writes the payload to spec.output_path (stdout when
/// empty) plus `<output_path>.meta.json`. Returns the process exit code:
/// 0 on success, 3 when every record is a flagged search failure.
int execute(const ExperimentSpec& spec);

}  // namespace tonsim::cli
