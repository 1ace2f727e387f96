#include "phylopt/ga.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace phylopt {
namespace {

constexpr int kMaxRedraws = 16;

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// k distinct values from [lo, hi], ascending
std::vector<std::size_t> sample_positions(Rng& rng, std::size_t lo, std::size_t hi, std::size_t k) {
  std::vector<std::size_t> range(hi - lo + 1);
  std::iota(range.begin(), range.end(), lo);
  std::vector<std::size_t> out;
  out.reserve(k);
  std::sample(range.begin(), range.end(), std::back_inserter(out), k, rng);
  return out;
}

}  // namespace

void GaParams::validate() const {
  if (population_size == 0) throw DomainError("population size must be positive");
  if (crossovers == 0 || mutations == 0 || injections == 0)
    throw DomainError("operator counts must be positive");
  if (target < 0 || target > 100) throw DomainError("target bootstrap must lie in [0, 100]");
}

Population Population::select(std::vector<ScoredTree> candidates, std::size_t capacity,
                              std::size_t generation) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ScoredTree& a, const ScoredTree& b) { return ranks_before(a, b); });
  Population p;
  p.generation_ = generation;
  std::unordered_set<GeneWord> seen;
  for (auto& c : candidates) {
    if (p.members_.size() == capacity) break;
    if (!seen.insert(c.word).second) continue;
    p.members_.push_back(std::move(c));
  }
  return p;
}

Population init_population(std::vector<ScoredTree> evaluated, std::size_t size) {
  if (evaluated.empty()) throw DomainError("cannot build a population from no evaluations");
  if (size == 0) throw DomainError("population size must be positive");
  return Population::select(std::move(evaluated), size);
}

std::optional<GeneWord> crossover_at(const GeneWord& w1, const GeneWord& w2, std::span<const std::size_t> cuts) {
  const auto n = w1.size();
  if (w2.size() != n) throw DomainError("crossover parents differ in length");
  std::size_t prev = 1;
  for (auto c : cuts) {
    if (c <= prev || c >= n) throw DomainError("crossover cuts must satisfy 1 < i_1 < ... < i_k < n");
    prev = c;
  }
  std::vector<std::uint8_t> bits(n);
  std::size_t passed = 0;  // cuts strictly before the current 1-based position
  for (std::size_t pos = 1; pos <= n; ++pos) {
    while (passed < cuts.size() && cuts[passed] < pos) ++passed;
    bits[pos - 1] = (passed % 2 == 0 ? w1 : w2).bits()[pos - 1];
  }
  return GeneWord::try_from_bits(std::move(bits));
}

GeneWord crossover(const GeneWord& w1, const GeneWord& w2, Rng& rng) {
  const auto n = w1.size();
  if (n < 4) throw DomainError("crossover needs words of length >= 4");
  if (w2.size() != n) throw DomainError("crossover parents differ in length");
  const std::size_t max_k = (n + 1) / 2 - 1;
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    const auto k = uniform(rng, 1, max_k);
    const auto cuts = sample_positions(rng, 2, n - 1, k);
    if (auto child = crossover_at(w1, w2, cuts)) return std::move(*child);
  }
  return w1;
}

std::optional<GeneWord> flip_bits(const GeneWord& w, std::span<const std::size_t> positions) {
  std::vector<std::uint8_t> bits(w.bits().begin(), w.bits().end());
  for (auto p : positions) {
    if (p >= bits.size()) throw DomainError("mutation position out of range");
    bits[p] ^= 1U;
  }
  return GeneWord::try_from_bits(std::move(bits));
}

GeneWord mutate(const GeneWord& w, Rng& rng) {
  const auto n = w.size();
  if (n < 4) throw DomainError("mutation needs words of length >= 4");
  const auto k = uniform(rng, 1, n / 4);
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    const auto positions = sample_positions(rng, 0, n - 1, k);
    if (auto out = flip_bits(w, positions)) return std::move(*out);
  }
  return w;
}

GeneWord random_word(std::size_t n, Rng& rng) {
  if (n < 2) throw DomainError("random words need length >= 2");
  const auto k = uniform(rng, 1, std::min<std::size_t>(10, n - 1));
  std::vector<GeneIndex> excluded;
  for (auto p : sample_positions(rng, 0, n - 1, k)) excluded.push_back({p});
  return word_excluding(n, excluded);
}

GenerationResult next_generation(const Population& population, BatchEvaluator& evaluator,
                                 const GaParams& params, Rng& rng) {
  if (population.empty()) throw DomainError("next_generation needs a non-empty population");
  GenerationResult out;
  std::vector<ScoredTree> pool(population.members().begin(), population.members().end());
  const auto n = population.best().word.size();

  auto absorb = [&](const std::vector<GeneWord>& words) {
    for (auto& ev : evaluator.evaluate_batch(words)) {
      if (ev.ok()) {
        const auto& tree = *ev.result;
        if (tree.score.lowest_bootstrap >= params.target &&
            (!out.winner || ranks_before(tree, *out.winner)))
          out.winner = tree;
        pool.push_back(tree);
      }
      out.evaluations.push_back(std::move(ev));
    }
    return out.winner.has_value();
  };

  const auto& members = population.members();
  std::vector<GeneWord> children;
  for (std::size_t i = 0; i < params.crossovers; ++i) {
    std::size_t a = 0;
    std::size_t b = 0;
    if (members.size() > 1) {
      a = uniform(rng, 0, members.size() - 1);
      b = uniform(rng, 0, members.size() - 2);
      if (b >= a) ++b;
    }
    children.push_back(crossover(members[a].word, members[b].word, rng));
  }
  bool done = absorb(children);

  if (!done) {
    std::vector<GeneWord> mutants;
    for (std::size_t i = 0; i < params.mutations; ++i)
      mutants.push_back(mutate(pool[uniform(rng, 0, pool.size() - 1)].word, rng));
    done = absorb(mutants);
  }
  if (!done) {
    std::vector<GeneWord> injected;
    for (std::size_t i = 0; i < params.injections; ++i) injected.push_back(random_word(n, rng));
    absorb(injected);
  }

  out.population = Population::select(std::move(pool), params.population_size, population.generation() + 1);
  return out;
}

GaOutcome run_ga(Population initial, BatchEvaluator& evaluator, const GaParams& params,
                 std::size_t max_generations, Rng& rng) {
  params.validate();
  if (initial.empty()) throw DomainError("run_ga needs a non-empty population");
  GaOutcome out;
  out.population = std::move(initial);
  for (std::size_t g = 0; g < max_generations; ++g) {
    auto gen = next_generation(out.population, evaluator, params, rng);
    out.population = std::move(gen.population);
    out.generations = g + 1;
    out.best_fitness.push_back(out.population.best().score.fitness);
    for (auto& ev : gen.evaluations) out.evaluations.push_back(std::move(ev));
    if (gen.winner) {
      out.winner = std::move(gen.winner);
      break;
    }
  }
  return out;
}

}  // namespace phylopt
