#include "phylopt/newick.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "phylopt/digest.hpp"
#include "phylopt/errors.hpp"

namespace phylopt {

// ---------------------------------------------------------------------------
// Tree

Tree::Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DomainError("tree has no nodes");
  if (nodes_[0].parent != -1) throw DomainError("node 0 must be the root");
  const int count = static_cast<int>(nodes_.size());
  std::vector<int> seen(nodes_.size(), 0);
  std::vector<int> stack{0};
  std::set<std::string_view> names;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(id)]++) throw DomainError("tree node reachable twice");
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.length && !(std::isfinite(*n.length) && *n.length >= 0.0))
      throw DomainError("branch lengths must be finite and non-negative");
    if (n.is_leaf()) {
      if (n.name.empty()) throw DomainError("leaf without a taxon name");
      if (!names.insert(n.name).second) throw DomainError("duplicate taxon " + n.name);
      if (n.support) throw DomainError("leaf " + n.name + " carries a support label");
      ++leaf_count_;
      continue;
    }
    if (n.children.size() < 2) throw DomainError("internal node with a single child");
    if (n.support && (*n.support < 0 || *n.support > 100))
      throw DomainError("support label outside [0, 100]");
    for (int c : n.children) {
      if (c <= 0 || c >= count) throw DomainError("child index out of range");
      if (nodes_[static_cast<std::size_t>(c)].parent != id)
        throw DomainError("child/parent links disagree");
      stack.push_back(c);
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw DomainError("tree contains unreachable nodes");
  if (leaf_count_ < 2) throw DomainError("tree needs at least two leaves");
}

std::vector<std::string> Tree::taxa() const {
  std::vector<std::string> out;
  out.reserve(leaf_count_);
  for (const auto& n : nodes_)
    if (n.is_leaf()) out.push_back(n.name);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Tree::internal_edges() const {
  std::vector<int> out;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const auto& n = node(id);
    if (n.is_leaf()) continue;
    if (id != 0) out.push_back(id);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

Tree Tree::with_supports(const std::vector<int>& supports) const {
  const auto edges = internal_edges();
  if (supports.size() != edges.size())
    throw DomainError("support count does not match internal edge count");
  auto nodes = nodes_;
  for (std::size_t i = 0; i < edges.size(); ++i)
    nodes[static_cast<std::size_t>(edges[i])].support = supports[i];
  return Tree(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_delimiter(char c) {
  switch (c) {
    case '(': case ')': case ',': case ':': case ';':
    case '[': case ']': case '\'':
      return true;
    default:
      return false;
  }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : s_(text) {}

  Tree parse() {
    skip_blank();
    if (at_end()) fail("empty Newick statement");
    parse_subtree(-1);
    skip_blank();
    if (at_end()) fail("missing terminating ';'");
    if (peek() == ')') fail("unbalanced parentheses");
    if (peek() != ';') fail("unexpected character '" + std::string(1, peek()) + "'");
    ++pos_;
    skip_blank();
    if (!at_end()) fail("trailing characters after ';'");
    try {
      return Tree(std::move(nodes_));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), pos_);
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const { throw ParseError(what, at); }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  void skip_blank() {
    while (!at_end()) {
      if (is_space(peek())) {
        ++pos_;
      } else if (peek() == '[') {
        const auto close = s_.find(']', pos_);
        if (close == std::string_view::npos) fail("unterminated comment");
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  int parse_subtree(int parent) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.back().parent = parent;
    skip_blank();
    if (at_end()) fail(parent < 0 ? "empty Newick statement" : "unbalanced parentheses");

    if (peek() == '(') {
      ++pos_;
      while (true) {
        const int child = parse_subtree(id);
        nodes_[static_cast<std::size_t>(id)].children.push_back(child);
        skip_blank();
        if (at_end()) fail("unbalanced parentheses");
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
      if (nodes_[static_cast<std::size_t>(id)].children.size() < 2)
        fail("internal node with a single child");
      skip_blank();
      const std::size_t label_at = pos_;
      auto label = read_label();
      if (label && parent >= 0) nodes_[static_cast<std::size_t>(id)].support = parse_support(*label, label_at);
    } else {
      const std::size_t label_at = pos_;
      auto label = read_label();
      if (!label || label->empty()) fail_at("empty leaf name", label_at);
      if (!taxa_.insert(*label).second) fail_at("duplicate taxon '" + *label + "'", label_at);
      nodes_[static_cast<std::size_t>(id)].name = std::move(*label);
    }

    skip_blank();
    if (!at_end() && peek() == ':') {
      ++pos_;
      skip_blank();
      nodes_[static_cast<std::size_t>(id)].length = read_length();
    }
    return id;
  }

  // Returns nullopt when no label is present at the cursor.
  std::optional<std::string> read_label() {
    if (at_end()) return std::nullopt;
    if (peek() == '\'') {
      const std::size_t start = pos_;
      ++pos_;
      std::string out;
      while (true) {
        if (at_end()) fail_at("unterminated quoted label", start);
        const char c = peek();
        ++pos_;
        if (c == '\'') {
          if (!at_end() && peek() == '\'') {
            out.push_back('\'');
            ++pos_;
            continue;
          }
          break;
        }
        out.push_back(c);
      }
      return out;
    }
    const std::size_t start = pos_;
    while (!at_end() && !is_delimiter(peek()) && !is_space(peek())) ++pos_;
    if (pos_ == start) return std::nullopt;
    std::size_t look = pos_;
    while (look < s_.size() && is_space(s_[look])) ++look;
    if (look > pos_ && look < s_.size() && !is_delimiter(s_[look]))
      fail_at("whitespace inside unquoted name", pos_);
    return std::string(s_.substr(start, pos_ - start));
  }

  double read_length() {
    const std::size_t start = pos_;
    while (!at_end() && !is_delimiter(peek()) && !is_space(peek())) ++pos_;
    const auto token = s_.substr(start, pos_ - start);
    if (token.empty()) fail_at("missing branch length after ':'", start);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      fail_at("malformed branch length '" + std::string(token) + "'", start);
    if (!std::isfinite(value) || value < 0.0)
      fail_at("branch length must be finite and non-negative", start);
    return value;
  }

  int parse_support(const std::string& label, std::size_t at) const {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
    if (label.empty() || ec != std::errc() || ptr != label.data() + label.size())
      fail_at("internal node label '" + label + "' is not a support value", at);
    if (!(value >= 0.0 && value <= 100.0)) fail_at("support label outside [0, 100]", at);
    return static_cast<int>(std::floor(value));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<TreeNode> nodes_;
  std::set<std::string> taxa_;
};

bool needs_quotes(const std::string& name) {
  if (name.empty()) return true;
  return std::any_of(name.begin(), name.end(), [](char c) { return is_delimiter(c) || is_space(c); });
}

void write_name(std::string& out, const std::string& name) {
  if (!needs_quotes(name)) {
    out += name;
    return;
  }
  out.push_back('\'');
  for (char c : name) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
}

void write_length(std::string& out, double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.push_back(':');
  out.append(buf, ptr);
}

void write_subtree(std::string& out, const Tree& tree, int id) {
  const auto& n = tree.node(id);
  if (n.is_leaf()) {
    write_name(out, n.name);
  } else {
    out.push_back('(');
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) out.push_back(',');
      write_subtree(out, tree, n.children[i]);
    }
    out.push_back(')');
    if (n.support) out += std::to_string(*n.support);
  }
  if (n.length) write_length(out, *n.length);
}

// Leaf sets as bit masks over the sorted taxon list.
using Mask = std::vector<std::uint64_t>;

struct SplitContext {
  std::vector<std::string> taxa;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t words = 0;

  explicit SplitContext(const Tree& tree) : taxa(tree.taxa()) {
    for (std::size_t i = 0; i < taxa.size(); ++i) index.emplace(taxa[i], i);
    words = (taxa.size() + 63) / 64;
  }

  Mask empty() const { return Mask(words, 0); }

  static void set(Mask& m, std::size_t i) { m[i / 64] |= std::uint64_t{1} << (i % 64); }
  static bool get(const Mask& m, std::size_t i) { return (m[i / 64] >> (i % 64)) & 1U; }

  static std::size_t count(const Mask& m) {
    std::size_t c = 0;
    for (auto w : m) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }

  Mask complement(const Mask& m) const {
    Mask out(words, 0);
    for (std::size_t i = 0; i < taxa.size(); ++i)
      if (!get(m, i)) set(out, i);
    return out;
  }

  // Smaller side; on equal sizes the side holding taxon 0.
  Mask canonical(const Mask& m) const {
    const auto c = count(m);
    const auto n = taxa.size();
    if (2 * c < n) return m;
    if (2 * c > n) return complement(m);
    return get(m, 0) ? m : complement(m);
  }

  bool trivial(const Mask& m) const {
    const auto c = count(m);
    return c < 2 || c + 2 > taxa.size();
  }

  Bipartition names(const Mask& m) const {
    Bipartition b;
    for (std::size_t i = 0; i < taxa.size(); ++i)
      if (get(m, i)) b.taxa.push_back(taxa[i]);
    return b;
  }
};

}  // namespace

Tree parse_newick(std::string_view text) { return NewickParser(text).parse(); }

std::vector<Tree> parse_newick_statements(std::string_view text) {
  std::vector<Tree> out;
  std::size_t start = 0;
  bool quoted = false;
  bool comment = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '\'') quoted = false;  // '' re-enters on the next character
      continue;
    }
    if (comment) {
      if (c == ']') comment = false;
      continue;
    }
    if (c == '\'') quoted = true;
    else if (c == '[') comment = true;
    else if (c == ';') {
      const auto stmt = text.substr(start, i + 1 - start);
      try {
        out.push_back(parse_newick(stmt));
      } catch (const ParseError& e) {
        throw ParseError(std::string("statement ") + std::to_string(out.size() + 1) + ": " + e.what(),
                         start + e.offset());
      }
      start = i + 1;
    }
  }
  const auto rest = text.substr(start);
  if (std::any_of(rest.begin(), rest.end(), [](char c) { return !is_space(c); }))
    throw ParseError("missing terminating ';'", text.size());
  return out;
}

Tree read_newick_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read tree file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto trees = parse_newick_statements(ss.str());
  if (trees.empty()) throw InputError("no Newick statement in " + path);
  return std::move(trees.front());
}

std::string serialize_newick(const Tree& tree) {
  std::string out;
  write_subtree(out, tree, tree.root());
  out.push_back(';');
  return out;
}

Bipartition make_bipartition(const std::vector<std::string>& side,
                             const std::vector<std::string>& all_taxa) {
  std::vector<std::string> sorted = all_taxa;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> chosen = side;
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  if (!std::includes(sorted.begin(), sorted.end(), chosen.begin(), chosen.end()))
    throw DomainError("split names a taxon outside the taxon set");
  std::vector<std::string> other;
  std::set_difference(sorted.begin(), sorted.end(), chosen.begin(), chosen.end(),
                      std::back_inserter(other));
  if (chosen.size() < 2 || other.size() < 2) throw DomainError("split is trivial");
  if (chosen.size() < other.size()) return {chosen};
  if (other.size() < chosen.size()) return {other};
  return {std::min(chosen, other)};
}

std::vector<SplitEdge> split_edges(const Tree& tree) {
  const SplitContext ctx(tree);
  const auto& nodes = tree.nodes();
  std::vector<Mask> masks(nodes.size(), ctx.empty());

  // postorder via reversed preorder
  std::vector<int> order;
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    order.push_back(id);
    for (int c : tree.node(id).children) stack.push_back(c);
  }
  std::map<Mask, SplitEdge> by_mask;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int id = *it;
    const auto& n = tree.node(id);
    auto& m = masks[static_cast<std::size_t>(id)];
    if (n.is_leaf()) {
      SplitContext::set(m, ctx.index.at(n.name));
    } else {
      for (int c : n.children) {
        const auto& cm = masks[static_cast<std::size_t>(c)];
        for (std::size_t w = 0; w < m.size(); ++w) m[w] |= cm[w];
      }
    }
    if (id == tree.root() || n.is_leaf() || ctx.trivial(m)) continue;
    auto key = ctx.canonical(m);
    auto [pos, inserted] = by_mask.try_emplace(key);
    auto& edge = pos->second;
    if (inserted) {
      edge.split = ctx.names(key);
      edge.support = n.support;
      edge.length = n.length;
    } else {
      if (n.support) edge.support = edge.support ? std::min(*edge.support, *n.support) : *n.support;
      if (n.length) edge.length = edge.length.value_or(0.0) + *n.length;
    }
  }
  std::vector<SplitEdge> out;
  out.reserve(by_mask.size());
  for (auto& [mask, edge] : by_mask) out.push_back(std::move(edge));
  std::sort(out.begin(), out.end(),
            [](const SplitEdge& a, const SplitEdge& b) { return a.split < b.split; });
  return out;
}

std::vector<Bipartition> bipartitions(const Tree& tree) {
  std::vector<Bipartition> out;
  for (auto& e : split_edges(tree)) out.push_back(std::move(e.split));
  return out;
}

TopologyKey topology_key(const Tree& tree) {
  std::string canon;
  auto put = [&canon](const std::string& name) {
    canon += std::to_string(name.size());
    canon.push_back(':');
    canon += name;
  };
  for (const auto& t : tree.taxa()) put(t);
  for (const auto& split : bipartitions(tree)) {
    canon.push_back('|');
    for (const auto& t : split.taxa) put(t);
  }
  return {sha256_hex(canon)};
}

int lowest_support(const Tree& tree) {
  std::optional<int> low;
  for (const auto& e : split_edges(tree))
    if (e.support) low = low ? std::min(*low, *e.support) : *e.support;
  if (!low) throw DomainError("tree has no labelled internal edge");
  return *low;
}

std::optional<int> branch_support(const Tree& tree, const Bipartition& split) {
  const auto taxa = tree.taxa();
  for (const auto& t : split.taxa)
    if (!std::binary_search(taxa.begin(), taxa.end(), t))
      throw DomainError("split names taxon '" + t + "' absent from the tree");
  Bipartition canon;
  try {
    canon = make_bipartition(split.taxa, taxa);
  } catch (const DomainError&) {
    return std::nullopt;  // trivial split: no internal edge
  }
  for (const auto& e : split_edges(tree))
    if (e.split == canon) return e.support;
  return std::nullopt;
}

std::string to_string(const Bipartition& split) {
  std::string out = "{";
  for (std::size_t i = 0; i < split.taxa.size(); ++i) {
    if (i) out.push_back(',');
    out += split.taxa[i];
  }
  out.push_back('}');
  return out;
}

}  // namespace phylopt
