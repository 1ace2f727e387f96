#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "phylopt/cli.hpp"
#include "phylopt/config.hpp"
#include "phylopt/report.hpp"
#include "support.hpp"

using namespace phylopt;
using phylopt::testing::read_file;
using phylopt::testing::TempDir;
using phylopt::testing::write_file;

namespace {

std::string gene_list(std::size_t n) {
  std::string out;
  for (const auto& g : testing::gene_labels(n)) out += (out.empty() ? "" : ",") + g;
  return out;
}

// 30 genes; `noisy` names the genes that cost support.
std::string synthetic_ini(const std::string& noisy, int base = 98, int penalty = 2, int flip = 1,
                          const std::string& extra = "") {
  return "[pipeline]\nworkers = 4\nseed = 1\njournal = run.journal\n" + extra + "[genes]\nlist = " + gene_list(30) +
         "\n[evaluator]\nbackend = synthetic\n[synthetic]\nnoisy = " + noisy + "\nbase = " + std::to_string(base) +
         "\npenalty = " + std::to_string(penalty) + "\nflip_threshold = " + std::to_string(flip) + "\n";
}

std::string twelve_noisy() {
  std::string out;
  for (std::size_t i = 0; i < 12; ++i) out += (out.empty() ? "g" : ",g") + std::to_string((i * 7 + 3) % 30 + 1);
  return out;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "phylopt");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "\t", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

void write_journal(const std::filesystem::path& path, const std::vector<JournalRecord>& records) {
  std::string text;
  for (const auto& r : records) text += format_record(r) + "\n";
  write_file(path, text);
}

}  // namespace

TEST_CASE("config: missing required keys are all reported together") {
  try {
    parse_config_text("");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("genes.list") != std::string::npos);
    CHECK(msg.find("evaluator.backend") != std::string::npos);
    CHECK(msg.find("2 problem(s)") != std::string::npos);
  }
}

TEST_CASE("config: range errors, unknown keys and several problems at once") {
  const std::string base = "[genes]\nlist = a,b,c,d\n[evaluator]\nbackend = synthetic\n";
  CHECK(parse_config_text(base + "[pipeline]\ntarget = 100\n").pipeline.target == 100);
  CHECK_THROWS_WITH_AS(parse_config_text(base + "[pipeline]\ngamma = 11\n"), doctest::Contains("pipeline.gamma"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(base + "[pipeline]\ntargte = 90\n"),
                       doctest::Contains("unknown key pipeline.targte"), ConfigError);
  try {
    parse_config_text(base + "[pipeline]\ngamma = 0\nworkers = x\n[ga]\npopulation = -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3 problem(s)") != std::string::npos);
    CHECK(msg.find("pipeline.gamma") != std::string::npos);
    CHECK(msg.find("pipeline.workers") != std::string::npos);
    CHECK(msg.find("ga.population") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text(base + "[synthetic]\nnoisy = z\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[genes]\nlist = a,b\n[evaluator]\nbackend = external\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[genes\n"), doctest::Contains("config line 1"), ConfigError);
}

TEST_CASE("config: serialization round-trips every field") {
  auto c = parse_config_text(synthetic_ini("g3,g7", 97, 3, 2, "gamma = 4.5\nrandom_iterations = 17\n"));
  c.tool_seed = 99;
  c.timeout_seconds = 12.5;
  c.pipeline.ga.generations_stage_two = 7;
  CHECK(parse_config_text(serialize_config(c)) == c);

  auto e = parse_config_text(
      "[genes]\nlist = a,b,c\nalignment_dir = al\n[evaluator]\nbackend = external\n[external]\n"
      "infer_command = tool -s {input}\nalign_command = mafft {input}\n");
  CHECK(e.backend == Backend::external);
  CHECK(parse_config_text(serialize_config(e)) == e);
  CHECK(input_files(e, "/base") ==
        std::vector<std::filesystem::path>{"/base/al/a.fasta", "/base/al/b.fasta", "/base/al/c.fasta"});
}

TEST_CASE("run: a single noisy gene wins in stage 1") {
  TempDir dir;
  write_file(dir / "c.ini", synthetic_ini("g10", 98, 4, 0));
  const auto r = cli({"run", "--config", (dir / "c.ini").string()});
  CHECK(r.code == kExitWinner);
  CHECK(r.out.find("winner at stage 1 (systematic)") != std::string::npos);
  CHECK(r.out.find("Min.Bootstrap") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "run.journal.report.txt"));
  CHECK(std::filesystem::exists(dir / "run.journal.best.nwk"));

  const auto m = RunManifest::from_json(read_file(dir / "run.journal.manifest.json"));
  CHECK(m.outcome == "winner");
  CHECK(m.stage_code == 1);
  CHECK(m.pipeline_seed == 1);
  CHECK(m.tool_seed == 12345);
  CHECK(m.tools.at("backend") == "synthetic");
  CHECK(m.input_digests.size() == 1);
  CHECK(parse_config_text(m.config).synthetic.noisy == std::vector<std::string>{"g10"});
  CHECK(stale_inputs(m).empty());

  SUBCASE("rerunning without --resume refuses to touch the journal") {
    const auto before = read_file(dir / "run.journal");
    const auto again = cli({"run", "--config", (dir / "c.ini").string()});
    CHECK(again.code == kExitError);
    CHECK(again.err.find("--resume") != std::string::npos);
    CHECK(read_file(dir / "run.journal") == before);
  }
  SUBCASE("changed inputs block a resume") {
    write_file(dir / "c.ini", synthetic_ini("g10", 98, 5, 0));
    const auto again = cli({"run", "--config", (dir / "c.ini").string(), "--resume"});
    CHECK(again.code == kExitError);
    CHECK(again.err.find("inputs changed") != std::string::npos);
  }
  SUBCASE("resuming a finished run repeats no evaluation") {
    const auto again = cli({"run", "--config", (dir / "c.ini").string(), "--resume", "--machine-readable"});
    CHECK(again.code == kExitWinner);
    CHECK(field(again.out, "backend_calls") == "0");
    CHECK(field(again.out, "stage") == "1");
  }
}

TEST_CASE("run: dry run evaluates nothing and writes nothing") {
  TempDir dir;
  write_file(dir / "c.ini", synthetic_ini("g10"));
  const auto r = cli({"run", "--config", (dir / "c.ini").string(), "--dry-run"});
  CHECK(r.code == kExitWinner);
  CHECK(r.out.find("dry run") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "run.journal"));
  CHECK_FALSE(std::filesystem::exists(dir / "run.journal.manifest.json"));
}

TEST_CASE("run: an unreachable target exhausts the budget with exit code 2") {
  TempDir dir;
  write_file(dir / "c.ini", synthetic_ini("", 90, 0, 0,
                                          "random_iterations = 8\n[ga]\ngenerations_one = 2\ngenerations_two = 2\n"));
  const auto r = cli({"run", "--config", (dir / "c.ini").string(), "--machine-readable"});
  CHECK(r.code == kExitExhausted);
  CHECK(field(r.out, "outcome") == "exhausted");
  CHECK(field(r.out, "step") == "ga-two");
  CHECK(RunManifest::from_json(read_file(dir / "run.journal.manifest.json")).outcome == "exhausted");
  // --target overrides the config and makes the same model a stage 1 win
  const auto low = cli({"run", "--config", (dir / "c.ini").string(), "--target", "90", "--journal",
                        (dir / "low.journal").string(), "--machine-readable"});
  CHECK(low.code == kExitWinner);
  CHECK(field(low.out, "stage") == "1");
  // --elevate raises it to elevated_target (100)
  const auto high = cli({"run", "--config", (dir / "c.ini").string(), "--elevate", "--journal",
                         (dir / "high.journal").string(), "--machine-readable"});
  CHECK(high.code == kExitExhausted);
}

TEST_CASE("run: resume from a truncated journal finishes identically") {
  TempDir dir;
  write_file(dir / "c.ini", synthetic_ini(twelve_noisy()));
  const auto full = cli({"run", "--config", (dir / "c.ini").string(), "--machine-readable"});
  REQUIRE(full.code == kExitWinner);
  CHECK(field(full.out, "stage") == "3");
  const auto complete = read_file(dir / "run.journal");
  const auto total = line_count(complete);
  CHECK(field(full.out, "backend_calls") == std::to_string(total));

  for (std::size_t keep : {std::size_t{0}, std::size_t{31}, std::size_t{150}, total / 2, total - 1}) {
    CAPTURE(keep);
    std::size_t cut = 0;
    for (std::size_t i = 0; i < keep; ++i) cut = complete.find('\n', cut) + 1;
    const auto partial = dir / ("partial-" + std::to_string(keep) + ".journal");
    write_file(partial, complete.substr(0, cut));
    const auto r = cli({"run", "--config", (dir / "c.ini").string(), "--resume", "--journal", partial.string(),
                        "--machine-readable"});
    CHECK(r.code == kExitWinner);
    CHECK(field(r.out, "backend_calls") == std::to_string(total - keep));
    CHECK(field(r.out, "word") == field(full.out, "word"));
    CHECK(read_file(partial) == complete);
  }

  SUBCASE("a torn final line is reported, not repaired") {
    const auto torn = dir / "torn.journal";
    write_file(torn, complete.substr(0, complete.find('\n') + 20));
    const auto r = cli({"run", "--config", (dir / "c.ini").string(), "--resume", "--journal", torn.string()});
    CHECK(r.code == kExitError);
    CHECK(r.err.find("truncated final line") != std::string::npos);
    CHECK(line_count(read_file(torn)) == 1);
  }
}

TEST_CASE("PHYLOPT_WORKDIR replaces the configured scratch directory") {
  TempDir dir;
  std::filesystem::create_directories(dir / "al");
  for (const auto* g : {"a", "b", "c"})
    write_file(dir / "al" / (std::string(g) + ".fasta"), ">t1\nACGT\n>t2\nACGA\n>t3\nACTT\n>t4\nAGGT\n");
  write_file(dir / "tool.sh",
             "#!/bin/sh\necho '((t1,t2)90,t3,t4);' > \"$2\"\n");
  std::filesystem::permissions(dir / "tool.sh", std::filesystem::perms::owner_all);
  write_file(dir / "c.ini", "[genes]\nlist = a,b,c\nalignment_dir = al\n[evaluator]\nbackend = external\n"
                            "workdir = configured\n[external]\ninfer_command = " +
                                (dir / "tool.sh").string() + " {input} {output}\n"
                            "[pipeline]\ntarget = 90\nworkers = 1\n[ga]\ngenerations_one = 0\ngenerations_two = 0\n");
  ::setenv("PHYLOPT_WORKDIR", (dir / "override").c_str(), 1);
  const auto r = cli({"run", "--config", (dir / "c.ini").string(), "--machine-readable"});
  ::unsetenv("PHYLOPT_WORKDIR");
  CHECK(r.code == kExitWinner);
  CHECK(std::filesystem::exists(dir / "override"));
  CHECK_FALSE(std::filesystem::exists(dir / "configured"));
  const auto m = RunManifest::from_json(read_file(dir / "phylopt.journal.manifest.json"));
  CHECK(m.input_digests.size() == 4);
  CHECK(m.tools.at("inference_program") == (dir / "tool.sh").string());

  // editing an alignment makes the manifest stale
  write_file(dir / "al" / "b.fasta", ">t1\nACGT\n>t2\nACGA\n>t3\nACTT\n>t4\nAGGA\n");
  const auto stale = stale_inputs(m);
  REQUIRE(stale.size() == 1);
  CHECK(stale[0].find("b.fasta") != std::string::npos);
}

TEST_CASE("report: 9053-record journal, read-only, TSV and empty journals") {
  TempDir dir;
  const auto path = dir / "t3.journal";
  write_journal(path, testing::synthesized_records(testing::reference_occurrences()));
  const auto before = read_file(path);
  const auto r = cli({"report", "--journal", path.string()});
  CHECK(r.code == kExitWinner);
  CHECK(r.out.find("m=9053") != std::string::npos);
  CHECK(r.out.find("lb=724") != std::string::npos);
  CHECK(r.out.find("topologies=43") != std::string::npos);
  CHECK(read_file(path) == before);

  const auto tsv = cli({"report", "--journal", path.string(), "--machine-readable"});
  REQUIRE(tsv.code == kExitWinner);
  std::istringstream in(tsv.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "Topology\tMin.Bootstrap\tAvg.Bootstrap\tOccurrences\tOccurrence %\tGene rate %\tSelected\tDigest");
  std::size_t yes = 0;
  std::size_t rows = 0;
  while (std::getline(in, line) && !line.empty()) {
    ++rows;
    yes += line.find("\tyes\t") != std::string::npos ? 1 : 0;
  }
  CHECK(rows == 43);
  CHECK(yes == 3);

  // gamma override moves the threshold: 1% of 9053 floors to 90
  const auto g1 = cli({"report", "--journal", path.string(), "--gamma", "1"});
  CHECK(g1.out.find("lb=90,") != std::string::npos);

  write_journal(dir / "one.journal", testing::synthesized_records({7}));
  const auto one = cli({"report", "--journal", (dir / "one.journal").string(), "--machine-readable"});
  CHECK(one.out.find("\t7\t100.00\t") != std::string::npos);

  write_file(dir / "empty.journal", "");
  const auto empty = cli({"report", "--journal", (dir / "empty.journal").string()});
  CHECK(empty.code == kExitError);
  CHECK(empty.err.find("no evaluations") != std::string::npos);
  CHECK(cli({"report", "--journal", (dir / "missing.journal").string()}).code == kExitError);
}

TEST_CASE("validate subcommand and argument errors") {
  TempDir dir;
  write_file(dir / "c.ini", synthetic_ini("g10"));
  const auto ok = cli({"validate", "--config", (dir / "c.ini").string()});
  CHECK(ok.code == kExitWinner);
  CHECK(ok.out.find("config ok: 30 genes, synthetic backend") != std::string::npos);
  write_file(dir / "bad.ini", "[pipeline]\ngamma = 50\n");
  const auto bad = cli({"validate", "--config", (dir / "bad.ini").string()});
  CHECK(bad.code == kExitError);
  CHECK(bad.err.find("3 problem(s)") != std::string::npos);
  CHECK(cli({"run", "--config", (dir / "c.ini").string(), "--gamma", "12"}).code == kExitError);
  CHECK(cli({"frobnicate"}).code == kExitError);
  CHECK(cli({"run"}).code == kExitError);
}

TEST_CASE("binary exit codes") {
  TempDir dir;
  write_file(dir / "win.ini", synthetic_ini("g10", 98, 4, 0));
  write_file(dir / "lose.ini", synthetic_ini("", 90, 0, 0,
                                             "random_iterations = 4\n[ga]\ngenerations_one = 1\ngenerations_two = 1\n"));
  auto status = [&](const std::string& args) {
    const int raw = std::system((std::string(PHYLOPT_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("run --config " + (dir / "win.ini").string()) == 0);
  CHECK(status("run --config " + (dir / "win.ini").string()) == 1);
  CHECK(status("run --config " + (dir / "lose.ini").string() + " --journal " + (dir / "l.journal").string()) == 2);
  CHECK(status("--help") == 0);
}
