#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phylopt/lasso.hpp"
#include "phylopt/topology.hpp"

namespace phylopt {

/// Design matrix for one branch of one topology: a row per ok record with
/// that topology, X = word bits, Y = support of `branch` in the record's tree.
/// Throws InsufficientData with fewer than two matching records.
lasso::LassoProblem<double> build_problem(std::span<const JournalRecord> records, const TopologyKey& topology,
                                          const Bipartition& branch, const std::vector<std::string>& labels = {});

/// Outcome of the Lasso analysis of one problematic branch.
struct BranchAnalysis {
  std::size_t topology_id = 0;
  Bipartition branch;
  int support = 0;                       // in the topology's best tree
  std::size_t rows = 0;
  std::vector<lasso::GeneEffect> effects;  // entry order
  std::vector<GeneIndex> negatives;      // negative effects, strongest first
  std::vector<GeneIndex> undetermined;   // constant columns
  bool converged = true;
  std::optional<GeneWord> candidate;
  std::string skipped;                   // reason when no analysis was possible
};

struct TargetingResult {
  std::vector<GeneWord> candidates;  // distinct, in discovery order
  std::vector<BranchAnalysis> branches;
};

/// For each selected topology and each branch of its best tree with support
/// below `target`, ranks genes along the Lasso path and proposes the best word
/// with every negative gene removed. When that word is already known, the
/// weakest negatives are restored one at a time until an unseen word appears.
TargetingResult lasso_targeting(std::span<const JournalRecord> records, std::span<const TopologyStats> selected,
                                int target, const std::function<bool(const GeneWord&)>& known,
                                const std::vector<std::string>& labels = {},
                                const lasso::PathOptions& options = {});

}  // namespace phylopt
