#include "phylopt/lasso_targeting.hpp"

#include <algorithm>

namespace phylopt {

lasso::LassoProblem<double> build_problem(std::span<const JournalRecord> records, const TopologyKey& topology,
                                          const Bipartition& branch, const std::vector<std::string>& labels) {
  std::vector<const JournalRecord*> rows;
  for (const auto& r : records)
    if (r.ok && r.topology == topology.digest) rows.push_back(&r);
  if (rows.size() < 2)
    throw InsufficientData("topology " + topology.digest.substr(0, 12) + " has " + std::to_string(rows.size()) +
                           " ok evaluation(s); the Lasso needs at least two");

  const auto n = rows.front()->word.size();
  lasso::LassoProblem<double> problem;
  problem.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
  problem.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = *rows[i];
    if (r.word.size() != n) throw DomainError("journal words differ in length");
    for (std::size_t j = 0; j < n; ++j)
      problem.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.word[j] ? 1.0 : 0.0;
    const auto support = branch_support(parse_newick(r.newick), branch);
    // same topology implies the same splits
    if (!support) throw DomainError("branch " + to_string(branch) + " missing from a tree of its own topology");
    problem.y(static_cast<Eigen::Index>(i)) = *support;
  }
  if (!labels.empty()) {
    if (labels.size() != n) throw DomainError("gene label count does not match the word length");
    problem.labels = labels;
  }
  problem.validate();
  return problem;
}

namespace {

std::optional<GeneWord> propose(const GeneWord& best, const std::vector<GeneIndex>& negatives,
                                const std::function<bool(const GeneWord&)>& known,
                                const std::vector<GeneWord>& taken) {
  for (std::size_t keep = negatives.size(); keep > 0; --keep) {
    std::vector<std::uint8_t> bits(best.bits().begin(), best.bits().end());
    for (std::size_t i = 0; i < keep; ++i) bits[negatives[i].value] = 0;
    auto word = GeneWord::try_from_bits(std::move(bits));
    if (!word || *word == best || known(*word)) continue;
    if (std::find(taken.begin(), taken.end(), *word) != taken.end()) continue;
    return word;
  }
  return std::nullopt;
}

}  // namespace

TargetingResult lasso_targeting(std::span<const JournalRecord> records, std::span<const TopologyStats> selected,
                                int target, const std::function<bool(const GeneWord&)>& known,
                                const std::vector<std::string>& labels, const lasso::PathOptions& options) {
  if (selected.empty()) throw DomainError("lasso targeting needs at least one selected topology");
  TargetingResult out;
  for (const auto& topo : selected) {
    if (!topo.best_word) continue;
    const auto best_tree = parse_newick(topo.best_newick);
    for (const auto& edge : split_edges(best_tree)) {
      if (!edge.support || *edge.support >= target) continue;
      BranchAnalysis a;
      a.topology_id = topo.id;
      a.branch = edge.split;
      a.support = *edge.support;
      try {
        const auto problem = build_problem(records, topo.key, edge.split, labels);
        a.rows = static_cast<std::size_t>(problem.x.rows());
        const auto path = lasso::lasso_path(problem.x, problem.y, options);
        a.converged = path.all_converged();
        a.effects = lasso::rank_genes(path);
        for (auto j : path.dropped) a.undetermined.push_back({static_cast<std::size_t>(j)});
      } catch (const InsufficientData& e) {
        a.skipped = e.what();
        out.branches.push_back(std::move(a));
        continue;
      }
      for (const auto& e : a.effects)
        if (e.direction == lasso::Direction::negative) a.negatives.push_back({static_cast<std::size_t>(e.gene)});
      a.candidate = propose(*topo.best_word, a.negatives, known, out.candidates);
      if (a.candidate) out.candidates.push_back(*a.candidate);
      out.branches.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace phylopt
