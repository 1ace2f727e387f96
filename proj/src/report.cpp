#include "phylopt/report.hpp"

#include <cstdio>
#include <set>

namespace phylopt {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

std::string render(const std::vector<std::vector<std::string>>& rows, bool machine_readable) {
  std::string out;
  if (machine_readable) {
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "\t" : "") + row[i];
      out += '\n';
    }
    return out;
  }
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "  ";
      // the last column (digest) is left aligned
      line += pad(row[i], widths[i], i + 1 == row.size());
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

}  // namespace

std::vector<StageCount> stage_counts(std::span<const JournalRecord> records) {
  std::vector<StageCount> counts = {{Stage::systematic}, {Stage::random}, {Stage::optimization}};
  for (const auto& r : records) {
    auto& c = counts[static_cast<std::size_t>(r.stage) - 1];
    (r.ok ? c.ok : c.failed) += 1;
  }
  return counts;
}

std::string format_topology_table(std::span<const JournalRecord> records, double gamma, bool machine_readable) {
  const auto stats = sort_by_occurrence(topology_stats(records));
  std::size_t m = 0;
  for (const auto& t : stats) m += t.occurrences;
  if (m == 0) throw DomainError("no evaluations");
  const auto lb = occurrence_lower_bound(m, gamma);

  std::vector<std::vector<std::string>> rows = {{"Topology", "Min.Bootstrap", "Avg.Bootstrap", "Occurrences",
                                                 "Occurrence %", "Gene rate %", "Selected", "Digest"}};
  for (const auto& t : stats) {
    rows.push_back({std::to_string(t.id), std::to_string(t.best_b), fixed(t.average_b, 2),
                    std::to_string(t.occurrences), fixed(100.0 * static_cast<double>(t.occurrences) / m, 2),
                    fixed(t.best_p, 2), t.occurrences >= lb ? "yes" : "no", t.key.digest.substr(0, 16)});
  }
  std::string out;
  if (!machine_readable)
    out += "ok evaluations m=" + std::to_string(m) + ", gamma=" + fixed(gamma, 2) + ", lower bound lb=" +
           std::to_string(lb) + ", topologies=" + std::to_string(stats.size()) + "\n";
  return out + render(rows, machine_readable);
}

std::string format_stage_counts(std::span<const JournalRecord> records, bool machine_readable) {
  std::vector<std::vector<std::string>> rows = {{"Stage", "Ok", "Failed", "Total"}};
  for (const auto& c : stage_counts(records))
    rows.push_back({std::to_string(static_cast<int>(c.stage)), std::to_string(c.ok), std::to_string(c.failed),
                    std::to_string(c.ok + c.failed)});
  return render(rows, machine_readable);
}

}  // namespace phylopt
