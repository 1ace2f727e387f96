#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phylopt/journal.hpp"

namespace phylopt {

/// Per-topology summary over the ok records of a journal.
struct TopologyStats {
  TopologyKey key;
  std::size_t id = 0;           // 1-based, order of first appearance
  std::size_t occurrences = 0;  // f(x): ok records with this topology
  std::optional<GeneWord> best_word;  // highest fitness, ties as in the GA
  int best_b = 0;
  double best_p = 0.0;
  double best_s = 0.0;
  double average_b = 0.0;  // mean lowest bootstrap over all member trees
  std::string best_newick;
};

/// Stats in order of first appearance. Failed records are ignored.
std::vector<TopologyStats> topology_stats(std::span<const JournalRecord> records);

/// floor(m * gamma / 100); gamma must lie in [1, 10].
std::size_t occurrence_lower_bound(std::size_t ok_records, double gamma);

void validate_gamma(double gamma);

/// Stats sorted by occurrences descending, then by id.
std::vector<TopologyStats> sort_by_occurrence(std::vector<TopologyStats> stats);

/// Topologies with f(x) >= lb, most frequent first. DomainError when the
/// records hold no ok evaluation.
std::vector<TopologyStats> select_topologies(std::span<const JournalRecord> records, double gamma);

}  // namespace phylopt
