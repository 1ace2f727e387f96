#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phylopt/errors.hpp"

namespace phylopt {

// Position of a gene in the lexicographically ordered core genome.
struct GeneIndex {
  std::size_t value = 0;
  friend auto operator<=>(const GeneIndex&, const GeneIndex&) = default;
};

/// Binary inclusion vector over the core genome: bit i set means core gene i
/// takes part in tree inference. Immutable; never empty, never all-zero.
class GeneWord {
 public:
  static GeneWord all_ones(std::size_t n);
  /// Throws DomainError on an empty, all-zero or non-binary bit vector.
  static GeneWord from_bits(std::vector<std::uint8_t> bits);
  static std::optional<GeneWord> try_from_bits(std::vector<std::uint8_t> bits);
  /// Parses the '0'/'1' textual form; index 0 is the first character.
  static GeneWord parse(std::string_view text);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  bool test(std::size_t i) const;
  std::size_t popcount() const { return popcount_; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::vector<GeneIndex> excluded() const;
  std::string to_string() const;
  std::size_t hash() const { return hash_; }

  // Ordering is lexicographic on the bits, the same as on to_string().
  friend bool operator==(const GeneWord& a, const GeneWord& b) { return a.bits_ == b.bits_; }
  friend std::strong_ordering operator<=>(const GeneWord& a, const GeneWord& b) {
    return a.bits_ <=> b.bits_;
  }

 private:
  explicit GeneWord(std::vector<std::uint8_t> bits);

  std::vector<std::uint8_t> bits_;
  std::size_t popcount_ = 0;
  std::size_t hash_ = 0;
};

/// Word with 0 exactly at `excluded`, 1 elsewhere.
GeneWord word_excluding(std::size_t n, std::span<const GeneIndex> excluded);

/// Percentage of 1 bits, in (0, 100].
double gene_rate(const GeneWord& word);

struct FitnessWeights {
  double bootstrap = 1.0;
  double gene_rate = 1.0;
};

struct Score {
  int lowest_bootstrap = 0;  // b, integer percentage
  double gene_rate = 0.0;    // p
  double fitness = 0.0;      // s = b + p with default weights
};

/// s = b + p. Throws DomainError unless 0 <= b <= 100 and 0 < p <= 100.
Score fitness(int lowest_bootstrap, double gene_rate, const FitnessWeights& weights = {});

/// Selection order shared by every stage: higher fitness, then higher gene
/// rate, then the lexicographically smaller word.
bool ranks_before(const Score& a, const GeneWord& wa, const Score& b, const GeneWord& wb);

}  // namespace phylopt

template <>
struct std::hash<phylopt::GeneWord> {
  std::size_t operator()(const phylopt::GeneWord& w) const noexcept { return w.hash(); }
};
