#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "phylopt/ga.hpp"
#include "phylopt/journal.hpp"
#include "phylopt/lasso_targeting.hpp"
#include "phylopt/topology.hpp"

namespace phylopt {

struct PipelineConfig {
  int target = 95;
  int elevated_target = 100;
  std::size_t random_iterations = 200;
  GaParams ga;  // ga.target is overwritten by `target`
  double gamma = 8.0;
  std::size_t workers = 31;
  std::uint64_t seed = 1;  // pipeline RNG
  std::vector<std::string> gene_labels;

  void validate() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// The five steps of a run. Journal stage codes group the last three as 3.
enum class Step : int { systematic = 1, random = 2, ga_one = 3, lasso = 4, ga_two = 5 };

Stage stage_code(Step step);
std::string_view step_name(Step step);

struct StepSummary {
  Step step = Step::systematic;
  std::size_t requested = 0;  // evaluation requests, cache hits included
  std::size_t new_words = 0;  // words first seen in this step
};

struct PipelineReport {
  std::optional<ScoredTree> winner;
  std::optional<ScoredTree> best;  // best ok evaluation overall
  Step last_step = Step::systematic;
  std::vector<StepSummary> steps;
  std::vector<TopologyStats> topologies;  // first-appearance order
  std::vector<TopologyStats> selected;    // from the Lasso step, if reached
  std::vector<GeneWord> lasso_candidates;
  std::vector<BranchAnalysis> lasso_branches;
  std::size_t ga_one_generations = 0;
  std::size_t ga_two_generations = 0;

  bool found() const { return winner.has_value(); }
  /// Stage code (1 systematic, 2 random, 3 optimisation) of the step that ended the run.
  Stage terminating_stage() const { return stage_code(last_step); }
};

/// Runs systematic, random, GA one, Lasso and GA two steps over a caching
/// worker pool, journaling each word once in first-seen order.
///
/// Resuming replays the whole schedule with the same seed: journaled words
/// come back from the cache, so the backend only sees words the journal
/// lacks, and the resumed journal ends up identical to an uninterrupted one.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, Evaluator& backend, Journal& journal);

  /// Called after each completed step; may throw to interrupt the run.
  void on_step(std::function<void(Step)> hook) { hook_ = std::move(hook); }
  void set_log(std::ostream* log) { log_ = log; }

  PipelineReport run();

  std::size_t backend_calls() const { return cache_.backend_calls(); }
  /// Distinct words evaluated or replayed by this run, first-seen order.
  const std::vector<JournalRecord>& history() const { return history_; }

 private:
  class Recorder;

  std::vector<Evaluation> evaluate(std::span<const GeneWord> words);
  std::optional<ScoredTree> winner_among(const std::vector<Evaluation>& evaluations) const;
  void finish_step(PipelineReport& report, Step step);
  void note(const std::string& message);

  PipelineConfig config_;
  Journal& journal_;
  CachingEvaluator cache_;
  WorkerPool pool_;
  PooledEvaluator pooled_;
  Step step_ = Step::systematic;
  StepSummary current_;
  std::vector<JournalRecord> history_;
  std::unordered_map<GeneWord, std::size_t> seen_;
  std::vector<ScoredTree> ok_trees_;
  std::function<void(Step)> hook_;
  std::ostream* log_ = nullptr;
};

std::vector<GeneWord> systematic_words(std::size_t n);

/// Word excluding k distinct genes, k uniform in [2, 10] clamped to n - 1.
GeneWord random_stage_word(std::size_t n, Rng& rng);

}  // namespace phylopt
