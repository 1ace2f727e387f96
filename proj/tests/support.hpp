#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <unistd.h>

#include "phylopt/evaluator.hpp"
#include "phylopt/journal.hpp"
#include "phylopt/synthetic.hpp"

namespace phylopt::testing {

/// Forwards to another evaluator and counts calls per word.
class CountingEvaluator : public Evaluator {
 public:
  explicit CountingEvaluator(Evaluator& inner) : inner_(inner) {}
  ScoredTree evaluate(const GeneWord& word) override {
    ++calls_;
    return inner_.evaluate(word);
  }
  std::size_t calls() const { return calls_.load(); }

 private:
  Evaluator& inner_;
  std::atomic<std::size_t> calls_{0};
};

/// Same tree for every word, every edge labelled `support`.
class ConstantEvaluator : public Evaluator {
 public:
  explicit ConstantEvaluator(int support)
      : tree_(parse_newick("(t1,t2,((t3,t4)" + std::to_string(support) + ",(t5,t6)" + std::to_string(support) +
                           ")" + std::to_string(support) + ");")) {}
  ScoredTree evaluate(const GeneWord& word) override { return make_scored_tree(word, tree_); }

 private:
  Tree tree_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("phylopt-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> gene_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("g" + std::to_string(i + 1));
  return out;
}

/// Random binary tree over taxa x1..x<leaves> with random supports and lengths.
inline std::string random_newick(std::mt19937_64& rng, std::size_t leaves, bool labels = true) {
  std::vector<std::string> parts;
  std::uniform_real_distribution<double> len(0.0, 2.0);
  std::uniform_int_distribution<int> sup(0, 100);
  auto length = [&] {
    std::ostringstream o;
    o.precision(17);
    o << ':' << len(rng);
    return o.str();
  };
  for (std::size_t i = 0; i < leaves; ++i) parts.push_back("x" + std::to_string(i + 1) + length());
  while (parts.size() > 3) {
    std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
    auto a = pick(rng);
    auto b = pick(rng);
    while (b == a) b = pick(rng);
    if (a > b) std::swap(a, b);
    std::string merged = "(" + parts[a] + "," + parts[b] + ")" + (labels ? std::to_string(sup(rng)) : "") + length();
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(b));
    parts[a] = merged;
  }
  std::string out = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out + ");";
}

/// Distinct words of length n (n >= 15): bits of i+1 cleared in the first 14
/// positions.
inline GeneWord indexed_word(std::size_t i, std::size_t n = 30) {
  std::vector<std::uint8_t> bits(n, 1);
  for (std::size_t j = 0; j < 14; ++j)
    if (((i + 1) >> j) & 1U) bits[j] = 0;
  return GeneWord::from_bits(std::move(bits));
}

/// `count` distinct 8-taxon topologies (caterpillars over permuted leaves).
inline std::vector<Tree> distinct_topologies(std::size_t count) {
  std::vector<std::string> leaves{"t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8"};
  std::vector<Tree> out;
  std::unordered_set<std::string> seen;
  do {
    std::string text = "(" + leaves[6] + "," + leaves[7] + ")";
    for (int i = 5; i >= 2; --i) text = "(" + leaves[static_cast<std::size_t>(i)] + "," + text + ")";
    text = "(" + leaves[0] + "," + leaves[1] + "," + text + ");";
    auto tree = parse_newick(text);
    if (seen.insert(topology_key(tree).digest).second) out.push_back(std::move(tree));
  } while (out.size() < count && std::next_permutation(leaves.begin(), leaves.end()));
  return out;
}

/// Ok records whose topology multiset is `occurrences` (one topology per
/// entry, in order), each record a distinct word with supports in [60, 100].
inline std::vector<JournalRecord> synthesized_records(const std::vector<std::size_t>& occurrences,
                                                      std::uint64_t seed = 1) {
  const auto trees = distinct_topologies(occurrences.size());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> support(60, 100);
  std::vector<JournalRecord> records;
  std::size_t next = 0;
  for (std::size_t t = 0; t < occurrences.size(); ++t) {
    for (std::size_t k = 0; k < occurrences[t]; ++k) {
      std::vector<int> s(trees[t].internal_edges().size());
      for (auto& v : s) v = support(rng);
      auto word = indexed_word(next++);
      auto scored = make_scored_tree(word, trees[t].with_supports(s));
      records.push_back(make_record(Stage::optimization, Evaluation{std::move(word), std::move(scored), {}}));
    }
  }
  return records;
}

/// Reference occurrence counts 5422, 2579, 787, ... plus filler topologies, 43 topologies and
/// m = 9053 records in total.
inline std::vector<std::size_t> reference_occurrences() {
  std::vector<std::size_t> counts{5422, 2579, 787, 89, 48, 31, 21, 11, 8};
  for (int i = 0; i < 23; ++i) counts.push_back(2);
  for (int i = 0; i < 11; ++i) counts.push_back(1);
  return counts;
}

}  // namespace phylopt::testing
