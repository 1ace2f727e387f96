#include "phylopt/pipeline.hpp"

#include <algorithm>
#include <numeric>

namespace phylopt {

void PipelineConfig::validate() const {
  if (target < 0 || target > 100) throw DomainError("target bootstrap must lie in [0, 100]");
  if (elevated_target < 0 || elevated_target > 100) throw DomainError("elevated target must lie in [0, 100]");
  validate_gamma(gamma);
  if (workers < 1) throw DomainError("worker count must be at least 1");
  if (gene_labels.size() < 2) throw DomainError("the pipeline needs at least two genes");
  auto ga_copy = ga;
  ga_copy.target = target;
  ga_copy.validate();
  if (gene_labels.size() < 4 && (ga.generations_stage_one > 0 || ga.generations_stage_two > 0))
    throw DomainError("genetic operators need at least four genes");
}

Stage stage_code(Step step) {
  switch (step) {
    case Step::systematic: return Stage::systematic;
    case Step::random: return Stage::random;
    default: return Stage::optimization;
  }
}

std::string_view step_name(Step step) {
  switch (step) {
    case Step::systematic: return "systematic";
    case Step::random: return "random";
    case Step::ga_one: return "ga-one";
    case Step::lasso: return "lasso";
    case Step::ga_two: return "ga-two";
  }
  return "unknown";
}

std::vector<GeneWord> systematic_words(std::size_t n) {
  if (n < 2) throw DomainError("the systematic stage needs at least two genes");
  std::vector<GeneWord> words;
  words.reserve(n + 1);
  words.push_back(GeneWord::all_ones(n));
  for (std::size_t i = 0; i < n; ++i) {
    const GeneIndex drop{i};
    words.push_back(word_excluding(n, std::span(&drop, 1)));
  }
  return words;
}

GeneWord random_stage_word(std::size_t n, Rng& rng) {
  if (n < 2) throw DomainError("random words need at least two genes");
  const std::size_t hi = std::min<std::size_t>(10, n - 1);
  const std::size_t lo = std::min<std::size_t>(2, hi);
  const auto k = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  std::sample(all.begin(), all.end(), std::back_inserter(picked), k, rng);
  std::vector<GeneIndex> excluded;
  for (auto p : picked) excluded.push_back({p});
  return word_excluding(n, excluded);
}

// ---------------------------------------------------------------------------

class Pipeline::Recorder : public BatchEvaluator {
 public:
  explicit Recorder(Pipeline& owner) : owner_(owner) {}
  std::vector<Evaluation> evaluate_batch(std::span<const GeneWord> words) override {
    return owner_.evaluate(words);
  }

 private:
  Pipeline& owner_;
};

Pipeline::Pipeline(PipelineConfig config, Evaluator& backend, Journal& journal)
    : config_(std::move(config)),
      journal_(journal),
      cache_(backend),
      pool_((config_.validate(), config_.workers)),
      pooled_(cache_, pool_) {
  config_.ga.target = config_.target;
  const auto n = config_.gene_labels.size();
  for (const auto& r : journal_.records()) {
    if (r.word.size() != n)
      throw InputError("journal words have length " + std::to_string(r.word.size()) + " but the config lists " +
                       std::to_string(n) + " genes");
    cache_.seed(to_evaluation(r));
  }
}

void Pipeline::note(const std::string& message) {
  if (log_) *log_ << message << '\n';
}

std::vector<Evaluation> Pipeline::evaluate(std::span<const GeneWord> words) {
  auto evaluations = pooled_.evaluate_batch(words);
  current_.requested += words.size();
  for (const auto& ev : evaluations) {
    if (seen_.count(ev.word) != 0) continue;
    auto record = make_record(stage_code(step_), ev);
    seen_.emplace(ev.word, history_.size());
    if (ev.ok()) ok_trees_.push_back(*ev.result);
    if (!journal_.find(ev.word)) journal_.append(record);
    history_.push_back(std::move(record));
    ++current_.new_words;
  }
  return evaluations;
}

std::optional<ScoredTree> Pipeline::winner_among(const std::vector<Evaluation>& evaluations) const {
  std::optional<ScoredTree> best;
  for (const auto& ev : evaluations) {
    if (!ev.ok() || ev.result->score.lowest_bootstrap < config_.target) continue;
    if (!best || ranks_before(*ev.result, *best)) best = *ev.result;
  }
  return best;
}

void Pipeline::finish_step(PipelineReport& report, Step step) {
  current_.step = step;
  report.steps.push_back(current_);
  report.last_step = step;
  note(std::string(step_name(step)) + ": " + std::to_string(current_.requested) + " requests, " +
       std::to_string(current_.new_words) + " new words, " + std::to_string(backend_calls()) + " backend calls");
  current_ = {};
  if (hook_) hook_(step);
}

PipelineReport Pipeline::run() {
  PipelineReport report;
  const auto n = config_.gene_labels.size();
  Rng rng(config_.seed);

  auto finalize = [&](std::optional<ScoredTree> winner) {
    report.winner = std::move(winner);
    for (const auto& t : ok_trees_)
      if (!report.best || ranks_before(t, *report.best)) report.best = t;
    report.topologies = topology_stats(history_);
    return std::move(report);
  };

  // 1. full word, then every leave-one-out word
  step_ = Step::systematic;
  const auto words = systematic_words(n);
  auto winner = winner_among(evaluate(std::span(words).first(1)));
  if (!winner) winner = winner_among(evaluate(std::span(words).subspan(1)));
  if (ok_trees_.empty()) throw Error("every systematic evaluation failed");
  finish_step(report, Step::systematic);
  if (winner) return finalize(std::move(winner));

  // 2. random exclusions in batches of one per worker
  step_ = Step::random;
  for (std::size_t done = 0; done < config_.random_iterations && !winner;) {
    const auto batch = std::min(config_.workers, config_.random_iterations - done);
    std::vector<GeneWord> drawn;
    for (std::size_t i = 0; i < batch; ++i) drawn.push_back(random_stage_word(n, rng));
    winner = winner_among(evaluate(drawn));
    done += batch;
  }
  finish_step(report, Step::random);
  if (winner) return finalize(std::move(winner));

  Recorder recorder(*this);

  // 3. GA seeded with every ok evaluation so far
  step_ = Step::ga_one;
  auto ga_one = run_ga(init_population(ok_trees_, config_.ga.population_size), recorder, config_.ga,
                       config_.ga.generations_stage_one, rng);
  report.ga_one_generations = ga_one.generations;
  finish_step(report, Step::ga_one);
  if (ga_one.winner) return finalize(std::move(ga_one.winner));

  // 4. Lasso candidates for the weak branches of frequent topologies
  step_ = Step::lasso;
  report.selected = select_topologies(history_, config_.gamma);
  auto targeting = lasso_targeting(
      history_, report.selected, config_.target,
      [this](const GeneWord& w) { return seen_.count(w) != 0; }, config_.gene_labels);
  report.lasso_candidates = targeting.candidates;
  report.lasso_branches = std::move(targeting.branches);
  std::vector<ScoredTree> injected;
  if (!targeting.candidates.empty()) {
    const auto evaluations = evaluate(targeting.candidates);
    winner = winner_among(evaluations);
    for (const auto& ev : evaluations)
      if (ev.ok()) injected.push_back(*ev.result);
  }
  finish_step(report, Step::lasso);
  if (winner) return finalize(std::move(winner));

  // 5. GA on every Lasso candidate, topped up with the stage-one survivors
  step_ = Step::ga_two;
  const auto capacity = config_.ga.population_size;
  auto merged = Population::select(std::move(injected), capacity).members();
  const auto kept = merged.size();
  for (const auto& m : ga_one.population.members()) {
    if (merged.size() == capacity) break;
    const auto same = [&m](const ScoredTree& t) { return t.word == m.word; };
    if (std::none_of(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(kept), same)) merged.push_back(m);
  }
  auto ga_two = run_ga(Population::select(std::move(merged), capacity), recorder, config_.ga,
                       config_.ga.generations_stage_two, rng);
  report.ga_two_generations = ga_two.generations;
  finish_step(report, Step::ga_two);
  return finalize(std::move(ga_two.winner));
}

}  // namespace phylopt
