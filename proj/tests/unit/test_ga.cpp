#include <doctest.h>

#include <set>

#include "phylopt/ga.hpp"
#include "support.hpp"

using namespace phylopt;

namespace {

std::size_t hamming(const GeneWord& a, const GeneWord& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

ScoredTree scored(const std::string& word, int b) {
  return make_scored_tree(GeneWord::parse(word),
                          parse_newick("(A,B,(C,D)" + std::to_string(b) + ");"));
}

class Batch : public BatchEvaluator {
 public:
  explicit Batch(CachingEvaluator& cache) : cache_(cache) {}
  std::vector<Evaluation> evaluate_batch(std::span<const GeneWord> words) override {
    std::vector<Evaluation> out;
    for (const auto& w : words) out.push_back(cache_.evaluate(w));
    return out;
  }

 private:
  CachingEvaluator& cache_;
};

}  // namespace

TEST_CASE("crossover segments alternate between parents") {
  const auto w1 = GeneWord::parse("111111");
  const auto w2 = GeneWord::parse("000011");
  const std::vector<std::size_t> cut{3};
  CHECK(crossover_at(w1, w2, cut)->to_string() == "111011");
  const std::vector<std::size_t> cuts{2, 4};
  CHECK(crossover_at(w1, w2, cuts)->to_string() == "110011");
  const std::vector<std::size_t> bad{1};
  CHECK_THROWS_AS(crossover_at(w1, w2, bad), DomainError);
  const std::vector<std::size_t> bad_end{6};
  CHECK_THROWS_AS(crossover_at(w1, w2, bad_end), DomainError);
  // all-zero children are rejected
  const std::vector<std::size_t> zero{2};
  CHECK_FALSE(crossover_at(GeneWord::parse("001000"), GeneWord::parse("110000"), zero).has_value());

  Rng rng(5);
  for (int i = 0; i < 100; ++i) CHECK(crossover(w1, w1, rng) == w1);
}

TEST_CASE("mutation flips exactly the chosen bits") {
  const auto w = GeneWord::parse("11111111");
  const std::vector<std::size_t> ends{0, 7};
  const auto m = flip_bits(w, ends);
  CHECK(m->to_string() == "01111110");
  CHECK(*flip_bits(*m, ends) == w);
  CHECK_FALSE(flip_bits(GeneWord::parse("1000"), std::vector<std::size_t>{0}).has_value());
}

TEST_CASE("operator contracts over random draws") {
  Rng rng(17);
  for (std::size_t n : {4, 5, 12, 50, 100}) {
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<std::uint8_t> a(n), b(n);
      for (auto& x : a) x = rng() & 1U;
      for (auto& x : b) x = rng() & 1U;
      a[0] = 1;
      b[n - 1] = 1;
      const auto w1 = GeneWord::from_bits(a);
      const auto w2 = GeneWord::from_bits(b);
      const auto child = crossover(w1, w2, rng);
      for (std::size_t i = 0; i < n; ++i) CHECK((child[i] == w1[i] || child[i] == w2[i]));

      const auto mutant = mutate(w1, rng);
      const auto d = hamming(w1, mutant);
      CHECK(d >= 1);
      CHECK(d <= n / 4);

      const auto r = random_word(n, rng);
      CHECK(r.popcount() + std::min<std::size_t>(10, n - 1) >= n);
      CHECK(r.popcount() < n);
    }
  }
  for (int i = 0; i < 200; ++i) CHECK(gene_rate(random_word(100, rng)) >= 90.0);
}

TEST_CASE("population selection") {
  // systematic plus random stage: 1 + n + 200 words for n = 30
  std::vector<ScoredTree> many;
  for (std::size_t i = 1; i <= 231; ++i) {
    std::string w(30, '1');
    for (std::size_t bit = 0; bit < 8; ++bit)
      if ((i >> bit) & 1U) w[bit] = '0';
    many.push_back(scored(w, 50 + static_cast<int>(i % 40)));
  }
  CHECK(init_population(many, 50).size() == 50);

  std::vector<ScoredTree> three{scored("1100", 80), scored("1110", 70), scored("0111", 90)};
  const auto p = init_population(three, 50);
  CHECK(p.size() == 3);
  CHECK(p.best().word.to_string() == "0111");

  std::vector<ScoredTree> dup{scored("1100", 80), scored("1100", 80)};
  CHECK(init_population(dup, 50).size() == 1);
  CHECK_THROWS_AS(init_population({}, 50), DomainError);

  // sorted by fitness with the documented tie rule
  std::vector<ScoredTree> ties{scored("1010", 90), scored("0110", 90), scored("1110", 89)};
  const auto t = Population::select(ties, 50);
  CHECK(t.members()[0].word.to_string() == "1110");
  CHECK(t.members()[1].word.to_string() == "0110");
}

TEST_CASE("generations are elitist, bounded and duplicate free") {
  SyntheticEvaluator synth(make_synthetic_model(30, {{3}, {11}, {19}}, 98, 2, 1));
  testing::CountingEvaluator counter(synth);
  CachingEvaluator cache(counter);
  Batch batch(cache);
  GaParams params;
  params.target = 100;  // unreachable here, so every generation runs
  Rng rng(2);
  std::vector<ScoredTree> start;
  for (int i = 0; i < 60; ++i) start.push_back(cache.evaluate(random_word(30, rng)).result.value());
  auto pop = init_population(start, 50);
  CHECK(pop.size() == 50);
  double best = pop.best().score.fitness;
  for (int g = 0; g < 200; ++g) {
    const auto before = counter.calls();
    auto gen = next_generation(pop, batch, params, rng);
    CHECK(counter.calls() - before <= 15);
    CHECK(gen.population.size() == 50);
    std::set<GeneWord> words;
    for (const auto& m : gen.population.members()) words.insert(m.word);
    CHECK(words.size() == gen.population.size());
    CHECK(gen.population.best().score.fitness >= best);
    best = gen.population.best().score.fitness;
    pop = std::move(gen.population);
  }
  // every evaluation went through the cache once
  CHECK(counter.calls() == cache.size());
}

TEST_CASE("run_ga stops on a winner or at the cap") {
  testing::ConstantEvaluator always(100);
  CachingEvaluator cache(always);
  Batch batch(cache);
  GaParams params;
  Rng rng(1);
  auto p0 = init_population({scored("110011", 50)}, 50);
  const auto won = run_ga(p0, batch, params, 200, rng);
  CHECK(won.winner.has_value());
  CHECK(won.generations == 1);

  const auto none = run_ga(p0, batch, params, 0, rng);
  CHECK_FALSE(none.winner.has_value());
  CHECK(none.generations == 0);
  CHECK(none.population.best().word == p0.best().word);
}

TEST_CASE("GA alone recovers a word with at most one noisy gene") {
  const std::vector<GeneIndex> noisy{{4}, {13}, {27}};
  const auto model = make_synthetic_model(30, noisy, 98, 2, 1);
  SyntheticEvaluator synth(model);
  CachingEvaluator cache(synth);
  Batch batch(cache);
  GaParams params;
  Rng rng(9);
  // start from the full word and its leave-one-out words only (b = 92 or 94)
  std::vector<ScoredTree> start{cache.evaluate(GeneWord::all_ones(30)).result.value()};
  for (std::size_t i = 0; i < 30; ++i) {
    const GeneIndex drop{i};
    start.push_back(cache.evaluate(word_excluding(30, std::span(&drop, 1))).result.value());
  }
  const auto out = run_ga(init_population(start, 50), batch, params, 200, rng);
  REQUIRE(out.winner.has_value());
  CHECK(model.noisy_included(out.winner->word) <= 1);
  CHECK(out.winner->score.lowest_bootstrap >= 95);
}
