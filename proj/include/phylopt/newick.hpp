#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phylopt/errors.hpp"

namespace phylopt {

struct TreeNode {
  std::string name;              // taxon name on leaves, empty on internal nodes
  std::optional<int> support;    // bootstrap label of the edge above an internal node
  std::optional<double> length;  // length of the edge above this node
  int parent = -1;
  std::vector<int> children;

  bool is_leaf() const { return children.empty(); }
};

/// Rooted, leaf-labelled tree stored as a node arena; node 0 is the root.
///
/// Invariants checked on construction: unique non-empty leaf names, at least
/// two leaves, every internal node has two or more children, supports in
/// [0, 100] and finite non-negative lengths.
class Tree {
 public:
  explicit Tree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int root() const { return 0; }
  std::size_t leaf_count() const { return leaf_count_; }

  /// Sorted taxon names.
  std::vector<std::string> taxa() const;

  /// Internal non-root nodes in preorder; each stands for the edge above it.
  std::vector<int> internal_edges() const;

  /// Copy with supports replaced along internal_edges() order.
  Tree with_supports(const std::vector<int>& supports) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t leaf_count_ = 0;
};

/// One side of a non-trivial split: the smaller side, or the
/// lexicographically smaller one when both sides have equal size.
struct Bipartition {
  std::vector<std::string> taxa;  // sorted

  friend auto operator<=>(const Bipartition&, const Bipartition&) = default;
};

/// Canonical identity of an unrooted leaf-labelled topology.
struct TopologyKey {
  std::string digest;  // lowercase hex SHA-256

  friend auto operator<=>(const TopologyKey&, const TopologyKey&) = default;
};

struct SplitEdge {
  Bipartition split;
  std::optional<int> support;
  std::optional<double> length;
};

Tree parse_newick(std::string_view text);

/// Splits a file holding one statement per file or per line.
std::vector<Tree> parse_newick_statements(std::string_view text);
Tree read_newick_file(const std::string& path);

std::string serialize_newick(const Tree& tree);

/// Canonicalises a set of taxa into the side a Bipartition stores.
Bipartition make_bipartition(const std::vector<std::string>& side,
                             const std::vector<std::string>& all_taxa);

/// Non-trivial splits of the unrooted tree with their edge labels, sorted by
/// split. The two root edges of a bifurcating root merge into one edge whose
/// support is the smaller label.
std::vector<SplitEdge> split_edges(const Tree& tree);

std::vector<Bipartition> bipartitions(const Tree& tree);

TopologyKey topology_key(const Tree& tree);

/// Minimum support over labelled non-trivial edges. Throws DomainError when
/// no such edge carries a label.
int lowest_support(const Tree& tree);

/// Support of the edge inducing `split`, or nullopt when the tree lacks that
/// split or the edge is unlabelled. Throws DomainError when `split` names a
/// taxon absent from the tree.
std::optional<int> branch_support(const Tree& tree, const Bipartition& split);

std::string to_string(const Bipartition& split);

}  // namespace phylopt

template <>
struct std::hash<phylopt::TopologyKey> {
  std::size_t operator()(const phylopt::TopologyKey& k) const noexcept {
    return std::hash<std::string>{}(k.digest);
  }
};
