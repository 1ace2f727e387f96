#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "phylopt/evaluator.hpp"

namespace phylopt {

using Rng = std::mt19937_64;

struct GaParams {
  std::size_t population_size = 50;
  std::size_t crossovers = 5;
  std::size_t mutations = 5;
  std::size_t injections = 5;
  std::size_t generations_stage_one = 200;
  std::size_t generations_stage_two = 1000;
  int target = 95;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const GaParams&, const GaParams&) = default;
};

/// Elitist population, best first (see ranks_before), no duplicate words.
class Population {
 public:
  Population() = default;

  const std::vector<ScoredTree>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const ScoredTree& best() const { return members_.front(); }
  std::size_t generation() const { return generation_; }

  /// Top `capacity` of the candidates, deduplicated by word.
  static Population select(std::vector<ScoredTree> candidates, std::size_t capacity,
                           std::size_t generation = 0);

 private:
  std::vector<ScoredTree> members_;
  std::size_t generation_ = 0;
};

/// Throws DomainError on empty input.
Population init_population(std::vector<ScoredTree> evaluated, std::size_t size);

/// Child alternating parents at the given 1-based cut positions
/// (1 < cut_1 < ... < cut_k < n): w1 on [1, cut_1], w2 on (cut_1, cut_2], ...
/// Returns nullopt for an all-zero child.
std::optional<GeneWord> crossover_at(const GeneWord& w1, const GeneWord& w2, std::span<const std::size_t> cuts);

/// Multi-point crossover with k uniform in [1, ceil(n/2) - 1]. All-zero
/// children are redrawn up to 16 times, after which w1 is returned.
GeneWord crossover(const GeneWord& w1, const GeneWord& w2, Rng& rng);

/// Flips the given 0-based positions; nullopt when the result is all-zero.
std::optional<GeneWord> flip_bits(const GeneWord& w, std::span<const std::size_t> positions);

/// Flips k distinct bits, k uniform in [1, floor(n/4)].
GeneWord mutate(const GeneWord& w, Rng& rng);

/// All-ones word with k random zeros, k uniform in [1, 10]
/// (in [1, n-1] when n <= 10).
GeneWord random_word(std::size_t n, Rng& rng);

struct GenerationResult {
  Population population;
  std::vector<Evaluation> evaluations;  // every evaluation requested, in order
  std::optional<ScoredTree> winner;     // best new tree with b >= target
};

/// Crossover, mutation and injection rounds followed by truncation to the
/// population size. Stops after the first round that produces a winner.
GenerationResult next_generation(const Population& population, BatchEvaluator& evaluator,
                                 const GaParams& params, Rng& rng);

struct GaOutcome {
  Population population;
  std::optional<ScoredTree> winner;
  std::size_t generations = 0;
  std::vector<Evaluation> evaluations;
  std::vector<double> best_fitness;  // per generation, after selection
};

GaOutcome run_ga(Population initial, BatchEvaluator& evaluator, const GaParams& params,
                 std::size_t max_generations, Rng& rng);

}  // namespace phylopt
