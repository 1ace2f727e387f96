#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "phylopt/errors.hpp"
#include "phylopt/gene_word.hpp"
#include "phylopt/newick.hpp"

namespace phylopt {

struct EvalMeta {
  std::uint64_t seed = 0;
  std::int64_t duration_ms = 0;
};

/// One evaluated word. score.lowest_bootstrap == lowest_support(tree),
/// score.gene_rate == gene_rate(word), topology == topology_key(tree).
struct ScoredTree {
  GeneWord word;
  Tree tree;
  Score score;
  TopologyKey topology;
  EvalMeta meta;
};

/// Builds a ScoredTree, deriving score and topology from the tree.
/// Throws DomainError when the tree carries no support label.
ScoredTree make_scored_tree(GeneWord word, Tree tree, EvalMeta meta = {},
                            const FitnessWeights& weights = {});

bool ranks_before(const ScoredTree& a, const ScoredTree& b);

/// Backend failure for one word: timeout, tool exit status, unusable output.
class EvaluationError : public Error {
 public:
  EvaluationError(const GeneWord& word, const std::string& diagnostics)
      : Error("evaluation of " + word.to_string() + " failed: " + diagnostics),
        word_(word.to_string()),
        diagnostics_(diagnostics) {}
  const std::string& word() const { return word_; }
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string word_;
  std::string diagnostics_;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  /// Must be safe to call concurrently. Throws EvaluationError on failure.
  virtual ScoredTree evaluate(const GeneWord& word) = 0;
};

/// Result of one evaluation request: a tree, or the failure diagnostics.
struct Evaluation {
  GeneWord word;
  std::optional<ScoredTree> result;
  std::string error;

  bool ok() const { return result.has_value(); }
};

/// Memoises a backend with single-flight semantics: concurrent requests for
/// one word wait on the same backend call. Failures are remembered too.
class CachingEvaluator {
 public:
  explicit CachingEvaluator(Evaluator& backend) : backend_(backend) {}

  Evaluation evaluate(const GeneWord& word);

  /// Inserts a known result without calling the backend (journal replay).
  void seed(Evaluation evaluation);

  bool contains(const GeneWord& word) const;
  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t size() const;

 private:
  Evaluator& backend_;
  mutable std::mutex mutex_;
  std::unordered_map<GeneWord, std::shared_future<Evaluation>> entries_;
  std::atomic<std::size_t> backend_calls_{0};
};

/// Fixed-size thread pool; tasks run in submission order per worker.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return threads_.size(); }

  template <typename F>
  auto submit(F&& f) -> std::future<std::invoke_result_t<F>> {
    using R = std::invoke_result_t<F>;
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(f));
    auto fut = task->get_future();
    {
      std::lock_guard lock(mutex_);
      tasks_.emplace([task] { (*task)(); });
    }
    cv_.notify_one();
    return fut;
  }

 private:
  void run();

  std::vector<std::thread> threads_;
  std::queue<std::function<void()>> tasks_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
};

/// Evaluates a batch of words and returns results in submission order.
class BatchEvaluator {
 public:
  virtual ~BatchEvaluator() = default;
  virtual std::vector<Evaluation> evaluate_batch(std::span<const GeneWord> words) = 0;
};

/// Fans a batch out over a worker pool through the cache.
class PooledEvaluator : public BatchEvaluator {
 public:
  PooledEvaluator(CachingEvaluator& cache, WorkerPool& pool) : cache_(cache), pool_(pool) {}
  std::vector<Evaluation> evaluate_batch(std::span<const GeneWord> words) override;

 private:
  CachingEvaluator& cache_;
  WorkerPool& pool_;
};

}  // namespace phylopt
