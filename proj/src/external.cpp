#include "phylopt/external.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "phylopt/process.hpp"

namespace fs = std::filesystem;

namespace phylopt {

std::vector<std::string> command_argv(const std::string& command_template, const std::string& input,
                                      const std::string& output, std::uint64_t seed,
                                      const std::string& workdir) {
  return substitute(split_command(command_template), {{"input", input},
                                                      {"output", output},
                                                      {"seed", std::to_string(seed)},
                                                      {"workdir", workdir}});
}

ExternalEvaluator::ExternalEvaluator(ExternalConfig config) : config_(std::move(config)) {
  if (config_.genes.empty()) throw ConfigError("external backend: empty gene list");
  if (config_.genes.size() != config_.alignments.size())
    throw ConfigError("external backend: one alignment file per gene is required");
  if (split_command(config_.infer_command).empty())
    throw ConfigError("external backend: inference command is required");
  if (!(config_.timeout_seconds > 0.0)) throw ConfigError("external backend: timeout must be positive");
  genes_.reserve(config_.alignments.size());
  for (const auto& path : config_.alignments) {
    if (!fs::exists(path)) throw InputError("alignment file " + path.string() + " does not exist");
    genes_.push_back(read_fasta(path));
  }
  validate_gene_alignments(genes_, config_.align_command.empty());
  fs::create_directories(config_.workdir);
}

void ExternalEvaluator::ensure_aligned() {
  if (config_.align_command.empty()) return;
  std::call_once(aligned_, [this] {
    const auto dir = config_.workdir / "aligned";
    fs::create_directories(dir);
    std::vector<Alignment> aligned;
    for (std::size_t i = 0; i < genes_.size(); ++i) {
      const auto input = fs::absolute(config_.alignments[i]);
      const auto output = dir / (config_.genes[i] + ".fasta");
      const auto argv = command_argv(config_.align_command, input.string(), output.string(),
                                     config_.seed, dir.string());
      const auto res = run_process(argv, dir, std::chrono::duration<double>(config_.timeout_seconds));
      if (res.timed_out || res.exit_code != 0 || !fs::exists(output))
        throw InputError("alignment of gene " + config_.genes[i] + " failed: " + res.stderr_tail);
      aligned.push_back(read_fasta(output));
    }
    validate_gene_alignments(aligned, true);
    genes_ = std::move(aligned);
  });
}

fs::path ExternalEvaluator::make_scratch() {
  const auto id = counter_.fetch_add(1);
  auto dir = config_.workdir / ("eval-" + std::to_string(id));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ScoredTree ExternalEvaluator::evaluate(const GeneWord& word) {
  if (word.size() != genes_.size())
    throw DomainError("gene word length does not match the gene list");
  ensure_aligned();
  const auto scratch = make_scratch();
  const auto input = scratch / "supermatrix.fasta";
  const auto output = scratch / "tree.nwk";
  {
    std::ofstream out(input, std::ios::binary);
    out << format_fasta(concat_alignment(word, genes_));
    if (!out) throw EvaluationError(word, "cannot write " + input.string());
  }
  const auto argv = command_argv(config_.infer_command, input.string(), output.string(), config_.seed,
                                 scratch.string());
  const auto res = run_process(argv, scratch, std::chrono::duration<double>(config_.timeout_seconds));
  if (res.timed_out)
    throw EvaluationError(word, "inference timed out after " + std::to_string(config_.timeout_seconds) + " s");
  if (res.exit_code != 0)
    throw EvaluationError(word, "inference exited with status " + std::to_string(res.exit_code) + ": " +
                                    res.stderr_tail);

  std::ifstream in(output, std::ios::binary);
  if (!in) throw EvaluationError(word, "inference produced no tree at " + output.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    auto trees = parse_newick_statements(ss.str());
    if (trees.empty()) throw EvaluationError(word, "empty tree file");
    Tree tree = std::move(trees.front());
    std::vector<std::string> expected;
    for (const auto& r : genes_.front().rows) expected.push_back(r.taxon);
    std::sort(expected.begin(), expected.end());
    if (tree.taxa() != expected) throw EvaluationError(word, "inferred tree taxa differ from the alignment");
    auto scored = make_scored_tree(word, std::move(tree),
                                   EvalMeta{config_.seed, static_cast<std::int64_t>(res.elapsed.count())});
    fs::remove_all(scratch);
    return scored;
  } catch (const ParseError& e) {
    throw EvaluationError(word, std::string("unparseable tree: ") + e.what());
  } catch (const DomainError& e) {
    throw EvaluationError(word, std::string("unusable tree: ") + e.what());
  }
}

}  // namespace phylopt
