#include <doctest.h>

#include "phylopt/journal.hpp"
#include "phylopt/topology.hpp"
#include "support.hpp"

using namespace phylopt;
using phylopt::testing::TempDir;

namespace {

std::size_t error_line(const std::filesystem::path& path) {
  try {
    Journal::load(path);
  } catch (const JournalError& e) {
    return e.line();
  }
  return 0;
}

std::vector<JournalRecord> three_records() {
  const auto model = make_synthetic_model(10, {{2}, {6}}, 97, 3, 1);
  std::vector<JournalRecord> out;
  out.push_back(make_record(Stage::systematic,
                            Evaluation{GeneWord::all_ones(10), synthetic_evaluate(GeneWord::all_ones(10), model), {}}));
  const auto w = GeneWord::parse("1101111011");
  out.push_back(make_record(Stage::random, Evaluation{w, synthetic_evaluate(w, model), {}}));
  out.push_back(make_record(Stage::optimization,
                            Evaluation{GeneWord::parse("0000000001"), std::nullopt, "tool\tcrashed\nbadly"}));
  return out;
}

}  // namespace

TEST_CASE("write three records, load three field-identical records") {
  TempDir dir;
  const auto path = dir / "j.tsv";
  const auto records = three_records();
  {
    Journal j;
    j.attach(path);
    for (const auto& r : records) j.append(r);
  }
  const auto loaded = Journal::load(path);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded.records()[0] == records[0]);
  CHECK(loaded.records()[1] == records[1]);
  CHECK(loaded.records()[2].newick == "tool crashed badly");
  CHECK_FALSE(loaded.records()[2].ok);
  CHECK(loaded.ok_count() == 2);
  CHECK(loaded.contains(GeneWord::parse("0000000001")));
  CHECK(format_record(loaded.records()[1]) == format_record(records[1]));
}

TEST_CASE("line format") {
  const auto r = three_records()[1];
  const auto line = format_record(r);
  CHECK(std::count(line.begin(), line.end(), '\t') == 9);
  CHECK(line.rfind("2\tok\t1101111011\t94\t80.0000\t174.0000\t", 0) == 0);
  const auto failed = format_record(three_records()[2]);
  CHECK(failed.rfind("3\tfailed\t0000000001\t0\t10.0000\t0.0000\t-\t0\t0\t", 0) == 0);
}

TEST_CASE("truncated final line names that line") {
  TempDir dir;
  const auto path = dir / "j.tsv";
  std::string text;
  for (const auto& r : three_records()) text += format_record(r) + "\n";
  testing::write_file(path, text.substr(0, text.size() - 5));
  CHECK(error_line(path) == 3);
}

TEST_CASE("corrupt lines are reported with their number") {
  TempDir dir;
  const auto path = dir / "j.tsv";
  const auto records = three_records();
  const auto good = format_record(records[0]) + "\n";

  auto expect = [&](const std::string& bad, std::size_t line) {
    testing::write_file(path, good + bad + "\n");
    CHECK(error_line(path) == line);
  };
  auto line = format_record(records[1]);
  expect("garbage", 2);
  expect("", 2);
  expect("4" + line.substr(1), 2);                                   // unknown stage
  expect(line.substr(0, 2) + "maybe" + line.substr(4), 2);           // bad status
  auto wrong_b = line;
  wrong_b.replace(wrong_b.find("\t94\t"), 4, "\t95\t");
  expect(wrong_b, 2);                                                // b disagrees with tree
  auto wrong_p = line;
  wrong_p.replace(wrong_p.find("80.0000"), 7, "81.0000");
  expect(wrong_p, 2);
  auto wrong_topo = line;
  wrong_topo.replace(wrong_topo.find(records[1].topology), 4, "ffff");
  expect(wrong_topo, 2);
  expect(good.substr(0, good.size() - 1), 2);                        // duplicate ok record
  const auto short_word = GeneWord::all_ones(5);
  const auto short_model = make_synthetic_model(5, {}, 90, 0, 0);
  expect(format_record(make_record(Stage::systematic,
                                   Evaluation{short_word, synthetic_evaluate(short_word, short_model), {}})),
         2);  // word length changes
}

TEST_CASE("duplicate ok appends are refused; a retry after failure is allowed") {
  Journal j;
  const auto records = three_records();
  j.append(records[0]);
  CHECK_THROWS_AS(j.append(records[0]), DomainError);
  const auto word = GeneWord::parse("1111111110");
  j.append(make_record(Stage::random, Evaluation{word, std::nullopt, "timeout"}));
  const auto model = make_synthetic_model(10, {{2}}, 97, 3, 1);
  j.append(make_record(Stage::random, Evaluation{word, synthetic_evaluate(word, model), {}}));
  CHECK(j.find(word)->ok);
}

TEST_CASE("a 10^4 record journal loads and its topology counts sum to the ok count") {
  TempDir dir;
  const auto path = dir / "big.tsv";
  const auto model = make_synthetic_model(30, {{1}, {8}, {20}}, 98, 2, 1);
  {
    Journal j;
    j.attach(path);
    for (std::size_t i = 0; i < 10000; ++i) {
      const auto w = testing::indexed_word(i);
      if (i % 97 == 0) j.append(make_record(Stage::optimization, Evaluation{w, std::nullopt, "failed"}));
      else j.append(make_record(Stage::optimization, Evaluation{w, synthetic_evaluate(w, model), {}}));
    }
  }
  const auto j = Journal::load(path);
  CHECK(j.size() == 10000);
  std::size_t total = 0;
  for (const auto& t : topology_stats(j.records())) total += t.occurrences;
  CHECK(total == j.ok_count());
  CHECK(j.ok_count() == 10000 - 104);
}

TEST_CASE("records convert back to evaluations") {
  const auto r = three_records()[1];
  const auto ev = to_evaluation(r);
  REQUIRE(ev.ok());
  CHECK(ev.result->score.lowest_bootstrap == r.b);
  CHECK(ev.result->topology.digest == r.topology);
  CHECK(make_record(r.stage, ev) == r);
  CHECK_FALSE(to_evaluation(three_records()[2]).ok());
}
