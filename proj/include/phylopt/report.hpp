#pragma once

#include <span>
#include <string>
#include <vector>

#include "phylopt/topology.hpp"

namespace phylopt {

struct StageCount {
  Stage stage = Stage::systematic;
  std::size_t ok = 0;
  std::size_t failed = 0;
};

/// Records per stage code, codes 1 to 3 always present.
std::vector<StageCount> stage_counts(std::span<const JournalRecord> records);

/// Topology table sorted by occurrences, selected rows marked. Text output
/// is fixed-width; machine-readable output is tab-separated with the same
/// values.
std::string format_topology_table(std::span<const JournalRecord> records, double gamma, bool machine_readable);

std::string format_stage_counts(std::span<const JournalRecord> records, bool machine_readable);

}  // namespace phylopt
