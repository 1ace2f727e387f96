#include "phylopt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace phylopt {

std::vector<TopologyStats> topology_stats(std::span<const JournalRecord> records) {
  std::vector<TopologyStats> stats;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<double> sums;
  for (const auto& r : records) {
    if (!r.ok) continue;
    auto [it, fresh] = slot.try_emplace(r.topology, stats.size());
    if (fresh) {
      TopologyStats t;
      t.key = TopologyKey{r.topology};
      t.id = stats.size() + 1;
      stats.push_back(std::move(t));
      sums.push_back(0.0);
    }
    auto& t = stats[it->second];
    ++t.occurrences;
    sums[it->second] += r.b;
    const Score score{r.b, r.p, r.s};
    if (!t.best_word || ranks_before(score, r.word, Score{t.best_b, t.best_p, t.best_s}, *t.best_word)) {
      t.best_word = r.word;
      t.best_b = r.b;
      t.best_p = r.p;
      t.best_s = r.s;
      t.best_newick = r.newick;
    }
  }
  for (std::size_t i = 0; i < stats.size(); ++i)
    stats[i].average_b = sums[i] / static_cast<double>(stats[i].occurrences);
  return stats;
}

void validate_gamma(double gamma) {
  if (!(gamma >= 1.0 && gamma <= 10.0)) throw DomainError("gamma must lie in [1, 10]");
}

std::size_t occurrence_lower_bound(std::size_t ok_records, double gamma) {
  validate_gamma(gamma);
  // the epsilon keeps exact products such as 100 * 1 / 100 from flooring down
  return static_cast<std::size_t>(std::floor(static_cast<double>(ok_records) * gamma / 100.0 + 1e-9));
}

std::vector<TopologyStats> sort_by_occurrence(std::vector<TopologyStats> stats) {
  std::sort(stats.begin(), stats.end(), [](const TopologyStats& a, const TopologyStats& b) {
    if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
    return a.id < b.id;
  });
  return stats;
}

std::vector<TopologyStats> select_topologies(std::span<const JournalRecord> records, double gamma) {
  validate_gamma(gamma);
  auto stats = topology_stats(records);
  std::size_t m = 0;
  for (const auto& t : stats) m += t.occurrences;
  if (m == 0) throw DomainError("topology selection needs at least one ok evaluation");
  const auto lb = occurrence_lower_bound(m, gamma);
  auto sorted = sort_by_occurrence(std::move(stats));
  std::erase_if(sorted, [lb](const TopologyStats& t) { return t.occurrences < lb; });
  return sorted;
}

}  // namespace phylopt
