#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "phylopt/gene_word.hpp"

namespace phylopt {

struct SequenceRow {
  std::string taxon;
  std::string sequence;
};

/// A FASTA file's rows, in file order.
struct Alignment {
  std::string source;  // file the rows came from, used in error messages
  std::vector<SequenceRow> rows;

  /// Row length; throws InputError if rows are ragged or the file is empty.
  std::size_t width() const;
  const SequenceRow* find(std::string_view taxon) const;
};

Alignment parse_fasta(std::string_view text, std::string source = "<memory>");
Alignment read_fasta(const std::filesystem::path& path);
std::string format_fasta(const Alignment& alignment);

/// Concatenates the selected genes taxon by taxon. Taxa follow the order of
/// the first selected gene's file. Throws InputError naming the offending file
/// on ragged rows or mismatched taxa.
Alignment concat_alignment(const GeneWord& word, const std::vector<Alignment>& genes);

/// Checks every file is rectangular and holds the same taxon set as the first.
void validate_gene_alignments(const std::vector<Alignment>& genes, bool require_aligned = true);

}  // namespace phylopt
