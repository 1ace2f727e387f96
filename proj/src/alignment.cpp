#include "phylopt/alignment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "phylopt/errors.hpp"

namespace phylopt {

std::size_t Alignment::width() const {
  if (rows.empty()) throw InputError(source + ": alignment has no sequences");
  const auto w = rows.front().sequence.size();
  for (const auto& r : rows)
    if (r.sequence.size() != w)
      throw InputError(source + ": ragged alignment (taxon " + r.taxon + " has " +
                       std::to_string(r.sequence.size()) + " columns, expected " + std::to_string(w) + ")");
  return w;
}

const SequenceRow* Alignment::find(std::string_view taxon) const {
  for (const auto& r : rows)
    if (r.taxon == taxon) return &r;
  return nullptr;
}

Alignment parse_fasta(std::string_view text, std::string source) {
  Alignment out;
  out.source = std::move(source);
  std::set<std::string> names;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '>') {
      auto header = line.substr(1);
      const auto first = header.find_first_not_of(" \t");
      if (first == std::string_view::npos)
        throw InputError(out.source + ": empty FASTA header at line " + std::to_string(line_no));
      header = header.substr(first);
      const auto stop = header.find_first_of(" \t");
      std::string name(header.substr(0, stop));
      if (!names.insert(name).second)
        throw InputError(out.source + ": duplicate taxon " + name);
      out.rows.push_back({std::move(name), {}});
      continue;
    }
    if (out.rows.empty())
      throw InputError(out.source + ": sequence data before the first header at line " +
                       std::to_string(line_no));
    for (char c : line)
      if (c != ' ' && c != '\t') out.rows.back().sequence.push_back(c);
  }
  return out;
}

Alignment read_fasta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read alignment " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_fasta(ss.str(), path.string());
}

std::string format_fasta(const Alignment& alignment) {
  std::string out;
  for (const auto& r : alignment.rows) {
    out.push_back('>');
    out += r.taxon;
    out.push_back('\n');
    out += r.sequence;
    out.push_back('\n');
  }
  return out;
}

void validate_gene_alignments(const std::vector<Alignment>& genes, bool require_aligned) {
  if (genes.empty()) throw InputError("no gene alignments given");
  std::set<std::string> reference;
  for (const auto& r : genes.front().rows) reference.insert(r.taxon);
  for (const auto& g : genes) {
    if (require_aligned) g.width();
    else if (g.rows.empty()) throw InputError(g.source + ": alignment has no sequences");
    std::set<std::string> taxa;
    for (const auto& r : g.rows) taxa.insert(r.taxon);
    if (taxa != reference) throw InputError(g.source + ": taxon set differs from " + genes.front().source);
  }
}

Alignment concat_alignment(const GeneWord& word, const std::vector<Alignment>& genes) {
  if (word.size() != genes.size())
    throw DomainError("gene word length does not match the number of gene alignments");
  std::vector<const Alignment*> selected;
  for (std::size_t i = 0; i < genes.size(); ++i)
    if (word[i]) selected.push_back(&genes[i]);
  if (selected.empty()) throw DomainError("no gene selected");

  const Alignment& first = *selected.front();
  first.width();
  Alignment out;
  out.source = "supermatrix";
  for (const auto& r : first.rows) out.rows.push_back({r.taxon, {}});

  for (const Alignment* gene : selected) {
    gene->width();
    for (auto& row : out.rows) {
      const auto* src = gene->find(row.taxon);
      if (!src) throw InputError(gene->source + ": missing taxon " + row.taxon);
      row.sequence += src->sequence;
    }
    if (gene->rows.size() != first.rows.size())
      throw InputError(gene->source + ": taxon set differs from " + first.source);
  }
  return out;
}

}  // namespace phylopt
