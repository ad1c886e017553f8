#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "moqd/archive.hpp"

namespace moqd {

/// Parse or validation failure while reading a snapshot; the message names
/// the offending line.
class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text archive snapshot. Header carries cell count, feature dimension,
/// objective count, front capacity and the tessellation centroids; one
/// record per stored solution follows. All floating-point values are
/// written in shortest round-trip form, so save/load is lossless.
void write_snapshot(const MoArchive& archive, std::ostream& out);
MoArchive read_snapshot(std::istream& in);

void save_snapshot(const MoArchive& archive, const std::string& path);
MoArchive load_snapshot(const std::string& path);

std::string snapshot_to_string(const MoArchive& archive);

}  // namespace moqd
