#include "phylopt/synthetic.hpp"

#include <algorithm>

namespace phylopt {
namespace {

int edge_value(const std::vector<int>& values, std::size_t edge) {
  return values.size() == 1 ? values.front() : values[edge];
}

void check_per_edge(const std::vector<int>& values, std::size_t edges, const char* what) {
  if (values.size() != 1 && values.size() != edges)
    throw DomainError(std::string("synthetic model: ") + what +
                      " needs one value or one per internal edge");
}

}  // namespace

void SyntheticModel::validate() const {
  if (gene_count == 0) throw DomainError("synthetic model: gene count must be positive");
  if (true_tree.taxa() != alternative_tree.taxa())
    throw DomainError("synthetic model: true and alternative trees have different taxa");
  const auto edges = true_tree.internal_edges().size();
  if (alternative_tree.internal_edges().size() != edges)
    throw DomainError("synthetic model: trees have different internal edge counts");
  check_per_edge(base, edges, "base support");
  check_per_edge(penalty, edges, "penalty");
  for (int b : base)
    if (b < 0 || b > 100) throw DomainError("synthetic model: base support outside [0, 100]");
  for (int p : penalty)
    if (p < 0) throw DomainError("synthetic model: negative penalty");
  for (auto g : noisy)
    if (g.value >= gene_count) throw DomainError("synthetic model: noisy gene index out of range");
  if (flip_threshold < 0) throw DomainError("synthetic model: negative flip threshold");
}

std::size_t SyntheticModel::noisy_included(const GeneWord& word) const {
  std::size_t c = 0;
  for (auto g : noisy)
    if (word[g.value]) ++c;
  return c;
}

SyntheticModel make_synthetic_model(std::size_t gene_count, std::vector<GeneIndex> noisy, int base,
                                    int penalty, int flip_threshold) {
  SyntheticModel m{
      gene_count,
      parse_newick("(t1,t2,((t3,t4),((t5,t6),(t7,t8))));"),
      parse_newick("(t1,t2,((t3,t5),((t4,t6),(t7,t8))));"),
      std::move(noisy),
      {base},
      {penalty},
      flip_threshold,
  };
  m.validate();
  return m;
}

ScoredTree synthetic_evaluate(const GeneWord& word, const SyntheticModel& model) {
  if (word.size() != model.gene_count)
    throw DomainError("gene word length does not match the synthetic model");
  const auto c = static_cast<int>(model.noisy_included(word));
  const Tree& shape = c > model.flip_threshold ? model.alternative_tree : model.true_tree;
  const auto edges = shape.internal_edges().size();
  std::vector<int> supports(edges);
  for (std::size_t e = 0; e < edges; ++e)
    supports[e] = std::clamp(edge_value(model.base, e) - edge_value(model.penalty, e) * c, 0, 100);
  return make_scored_tree(word, shape.with_supports(supports));
}

SyntheticEvaluator::SyntheticEvaluator(SyntheticModel model) : model_(std::move(model)) {
  model_.validate();
}

ScoredTree SyntheticEvaluator::evaluate(const GeneWord& word) { return synthetic_evaluate(word, model_); }

}  // namespace phylopt
