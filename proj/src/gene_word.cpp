#include "phylopt/gene_word.hpp"

#include <algorithm>
#include <cmath>

#include "phylopt/errors.hpp"

namespace phylopt {

GeneWord::GeneWord(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  popcount_ = static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  // FNV-1a over the bits and the length
  std::uint64_t h = 1469598103934665603ULL;
  for (auto b : bits_) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  h ^= bits_.size();
  h *= 1099511628211ULL;
  hash_ = static_cast<std::size_t>(h);
}

GeneWord GeneWord::all_ones(std::size_t n) {
  if (n == 0) throw DomainError("gene word length must be positive");
  return GeneWord(std::vector<std::uint8_t>(n, 1));
}

std::optional<GeneWord> GeneWord::try_from_bits(std::vector<std::uint8_t> bits) {
  if (bits.empty()) return std::nullopt;
  bool any = false;
  for (auto b : bits) {
    if (b > 1) return std::nullopt;
    any = any || b == 1;
  }
  if (!any) return std::nullopt;
  return GeneWord(std::move(bits));
}

GeneWord GeneWord::from_bits(std::vector<std::uint8_t> bits) {
  if (bits.empty()) throw DomainError("gene word length must be positive");
  for (auto b : bits)
    if (b > 1) throw DomainError("gene word bits must be 0 or 1");
  auto word = try_from_bits(std::move(bits));
  if (!word) throw DomainError("gene word selects no gene");
  return std::move(*word);
}

GeneWord GeneWord::parse(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1')
      throw DomainError("gene word text must contain only '0' and '1'");
    bits.push_back(c == '1' ? 1 : 0);
  }
  return from_bits(std::move(bits));
}

bool GeneWord::test(std::size_t i) const {
  if (i >= bits_.size()) throw DomainError("gene index out of range");
  return bits_[i] != 0;
}

std::vector<GeneIndex> GeneWord::excluded() const {
  std::vector<GeneIndex> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (!bits_[i]) out.push_back({i});
  return out;
}

std::string GeneWord::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) s[i] = '1';
  return s;
}

GeneWord word_excluding(std::size_t n, std::span<const GeneIndex> excluded) {
  if (n == 0) throw DomainError("gene word length must be positive");
  std::vector<std::uint8_t> bits(n, 1);
  for (auto idx : excluded) {
    if (idx.value >= n) throw DomainError("excluded gene index out of range");
    bits[idx.value] = 0;
  }
  auto word = GeneWord::try_from_bits(std::move(bits));
  if (!word) throw DomainError("cannot exclude every gene");
  return std::move(*word);
}

double gene_rate(const GeneWord& word) {
  return 100.0 * static_cast<double>(word.popcount()) / static_cast<double>(word.size());
}

Score fitness(int lowest_bootstrap, double gene_rate, const FitnessWeights& weights) {
  if (lowest_bootstrap < 0 || lowest_bootstrap > 100)
    throw DomainError("lowest bootstrap must lie in [0, 100]");
  if (!(gene_rate > 0.0 && gene_rate <= 100.0))
    throw DomainError("gene rate must lie in (0, 100]");
  Score s;
  s.lowest_bootstrap = lowest_bootstrap;
  s.gene_rate = gene_rate;
  if (weights.bootstrap == 1.0 && weights.gene_rate == 1.0)
    s.fitness = lowest_bootstrap + gene_rate;
  else
    s.fitness = weights.bootstrap * lowest_bootstrap + weights.gene_rate * gene_rate;
  return s;
}

bool ranks_before(const Score& a, const GeneWord& wa, const Score& b, const GeneWord& wb) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  if (a.gene_rate != b.gene_rate) return a.gene_rate > b.gene_rate;
  return wa < wb;
}

}  // namespace phylopt
