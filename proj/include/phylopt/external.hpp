#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "phylopt/alignment.hpp"
#include "phylopt/evaluator.hpp"

namespace phylopt {

/// External alignment/inference backend settings. Command templates accept
/// the placeholders {input}, {output}, {seed} and {workdir}.
struct ExternalConfig {
  std::vector<std::string> genes;                  // lexicographic gene order
  std::vector<std::filesystem::path> alignments;   // one FASTA per gene
  std::string align_command;                       // empty when inputs are pre-aligned
  std::string infer_command;
  std::filesystem::path workdir;
  double timeout_seconds = 3600.0;
  std::uint64_t seed = 12345;
};

/// Argument vector for one invocation of a command template.
std::vector<std::string> command_argv(const std::string& command_template, const std::string& input,
                                      const std::string& output, std::uint64_t seed,
                                      const std::string& workdir);

class ExternalEvaluator : public Evaluator {
 public:
  /// Reads every gene file; throws InputError on missing files or taxon
  /// mismatches.
  explicit ExternalEvaluator(ExternalConfig config);

  ScoredTree evaluate(const GeneWord& word) override;

  const ExternalConfig& config() const { return config_; }

 private:
  void ensure_aligned();
  std::filesystem::path make_scratch();

  ExternalConfig config_;
  std::vector<Alignment> genes_;
  std::once_flag aligned_;
  std::atomic<std::uint64_t> counter_{0};
};

}  // namespace phylopt
