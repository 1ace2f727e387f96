#pragma once

#include <vector>

#include "phylopt/evaluator.hpp"

namespace phylopt {

/// Deterministic stand-in for alignment + inference. Let c be the number of
/// noisy genes a word includes. The emitted tree is the alternative topology
/// when c > flip_threshold, the true one otherwise, and every internal edge e
/// gets support clamp(base[e] - penalty[e] * c, 0, 100).
///
/// `base` and `penalty` hold either a single uniform value or one value per
/// internal edge in Tree::internal_edges() order.
struct SyntheticModel {
  std::size_t gene_count = 0;
  Tree true_tree;
  Tree alternative_tree;
  std::vector<GeneIndex> noisy;
  std::vector<int> base{100};
  std::vector<int> penalty{0};
  int flip_threshold = 0;

  void validate() const;
  std::size_t noisy_included(const GeneWord& word) const;
};

/// Model over eight taxa t1..t8; the alternative tree swaps t4 and t5.
SyntheticModel make_synthetic_model(std::size_t gene_count, std::vector<GeneIndex> noisy, int base,
                                    int penalty, int flip_threshold);

ScoredTree synthetic_evaluate(const GeneWord& word, const SyntheticModel& model);

class SyntheticEvaluator : public Evaluator {
 public:
  explicit SyntheticEvaluator(SyntheticModel model);
  ScoredTree evaluate(const GeneWord& word) override;
  const SyntheticModel& model() const { return model_; }

 private:
  SyntheticModel model_;
};

}  // namespace phylopt
