#include <doctest.h>

#include <cmath>
#include <random>
#include <unordered_set>

#include "phylopt/gene_word.hpp"

using namespace phylopt;

TEST_CASE("gene_rate of full, half and fractional words") {
  CHECK(gene_rate(GeneWord::all_ones(100)) == 100.0);
  CHECK(gene_rate(GeneWord::parse("1010")) == 50.0);

  std::vector<std::uint8_t> bits(116, 0);
  for (std::size_t i = 0; i < 75; ++i) bits[i] = 1;
  const double p = gene_rate(GeneWord::from_bits(bits));
  CHECK(p == doctest::Approx(64.6551724).epsilon(1e-9));
  CHECK(std::round(p * 10) / 10 == doctest::Approx(64.7));
}

TEST_CASE("fitness is b + p and range checked") {
  CHECK(fitness(100, 99.1).fitness == 100 + 99.1);
  CHECK(fitness(0, 100).fitness == 100.0);
  CHECK(fitness(88, 64.7).fitness == 88 + 64.7);
  CHECK_THROWS_AS(fitness(-1, 50), DomainError);
  CHECK_THROWS_AS(fitness(101, 50), DomainError);
  CHECK_THROWS_AS(fitness(50, 0), DomainError);
  CHECK_THROWS_AS(fitness(50, 100.5), DomainError);
  // monotone in both terms
  CHECK(fitness(90, 50).fitness > fitness(89, 50).fitness);
  CHECK(fitness(90, 51).fitness > fitness(90, 50).fitness);
}

TEST_CASE("word_excluding") {
  CHECK(word_excluding(5, {}).to_string() == "11111");
  const std::vector<GeneIndex> two{{2}};
  CHECK(word_excluding(5, two).to_string() == "11011");
  const std::vector<GeneIndex> ends{{0}, {4}};
  CHECK(word_excluding(5, ends).to_string() == "01110");
  const std::vector<GeneIndex> out_of_range{{5}};
  CHECK_THROWS_AS(word_excluding(5, out_of_range), DomainError);
  const std::vector<GeneIndex> all{{0}, {1}, {2}};
  CHECK_THROWS_AS(word_excluding(3, all), DomainError);
}

TEST_CASE("words are validated, immutable values with a stable hash") {
  CHECK_THROWS_AS(GeneWord::parse("0000"), DomainError);
  CHECK_THROWS_AS(GeneWord::parse("10a1"), DomainError);
  CHECK_THROWS_AS(GeneWord::parse(""), DomainError);
  CHECK_FALSE(GeneWord::try_from_bits({0, 0, 0}).has_value());
  const auto w = GeneWord::parse("0110");
  CHECK(w.size() == 4);
  CHECK(w.popcount() == 2);
  CHECK(w[1]);
  CHECK_FALSE(w[0]);
  CHECK(w.excluded() == std::vector<GeneIndex>{{0}, {3}});
  CHECK(GeneWord::parse("0110") == w);
  CHECK(std::hash<GeneWord>{}(GeneWord::parse("0110")) == std::hash<GeneWord>{}(w));
  CHECK(GeneWord::parse("0110") < GeneWord::parse("1000"));
}

TEST_CASE("popcount and gene rate agree on random words") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 150;
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = rng() & 1U;
    bits[rng() % n] = 1;
    const auto w = GeneWord::from_bits(bits);
    std::size_t ones = 0;
    for (auto b : bits) ones += b;
    CHECK(w.popcount() == ones);
    CHECK(gene_rate(w) == 100.0 * static_cast<double>(ones) / static_cast<double>(n));
    CHECK(GeneWord::parse(w.to_string()) == w);
  }
}

TEST_CASE("ranking: fitness, then gene rate, then smaller word") {
  const auto a = GeneWord::parse("1101");
  const auto b = GeneWord::parse("1110");
  CHECK(ranks_before(fitness(90, 75), a, fitness(89, 75), b));
  // same s, higher p first
  CHECK(ranks_before(Score{80, 80.0, 160.0}, a, Score{85, 75.0, 160.0}, b));
  // full tie resolved by the smaller word
  CHECK(ranks_before(fitness(90, 75), a, fitness(90, 75), b));
  CHECK_FALSE(ranks_before(fitness(90, 75), b, fitness(90, 75), a));
  CHECK_FALSE(ranks_before(fitness(90, 75), a, fitness(90, 75), a));
}
