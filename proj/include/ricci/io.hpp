#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"

namespace ricci {

/// "node,value" header then one row per node, 17 significant digits.
void write_field_csv(std::ostream& os, const ScalarField& f);
/// Reads the format above onto an existing surface; the node count must match.
ScalarField read_field_csv(std::istream& is, const SurfacePtr& surface);

/// 16-byte header (int64 kind tag, int64 resolution, little endian) followed
/// by the nodal values as raw IEEE doubles. Round trips are bit exact.
void write_field_binary(std::ostream& os, const ScalarField& f);
ScalarField read_field_binary(std::istream& is);
/// Same, reusing surface when the header matches it.
ScalarField read_field_binary(std::istream& is, const SurfacePtr& surface);

/// One row per stored time: t followed by the nodal values.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Stack of records (double t, then one binary field record) per stored time.
void write_trajectory_binary(std::ostream& os, const Trajectory& traj);
/// Reads a stack written above. Derivatives are recomputed with eval_rhs, so
/// forced runs come back without their forcing.
Trajectory read_trajectory_binary(std::istream& is);

/// 16 hex digits of the FNV-1a hash of the initial state and the config text.
std::string run_id(const Trajectory& traj, const std::string& config_text);

/// JSON object with run id, surface, status and the given config entries.
void write_trajectory_metadata(std::ostream& os, const Trajectory& traj,
                               const std::map<std::string, std::string>& config);

}  // namespace ricci
