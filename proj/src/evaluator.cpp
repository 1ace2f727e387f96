#include "phylopt/evaluator.hpp"

namespace phylopt {

ScoredTree make_scored_tree(GeneWord word, Tree tree, EvalMeta meta, const FitnessWeights& weights) {
  const int b = lowest_support(tree);
  const Score score = fitness(b, gene_rate(word), weights);
  auto key = topology_key(tree);
  return ScoredTree{std::move(word), std::move(tree), score, std::move(key), meta};
}

bool ranks_before(const ScoredTree& a, const ScoredTree& b) {
  return ranks_before(a.score, a.word, b.score, b.word);
}

// ---------------------------------------------------------------------------

Evaluation CachingEvaluator::evaluate(const GeneWord& word) {
  std::promise<Evaluation> promise;
  std::shared_future<Evaluation> future;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(word);
    if (it != entries_.end()) {
      future = it->second;
    } else {
      future = promise.get_future().share();
      entries_.emplace(word, future);
      owner = true;
    }
  }
  if (!owner) return future.get();

  try {
    ++backend_calls_;
    auto tree = backend_.evaluate(word);
    promise.set_value(Evaluation{word, std::move(tree), {}});
  } catch (const EvaluationError& e) {
    promise.set_value(Evaluation{word, std::nullopt, e.diagnostics()});
  } catch (...) {
    {
      std::lock_guard lock(mutex_);
      entries_.erase(word);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
  return future.get();
}

void CachingEvaluator::seed(Evaluation evaluation) {
  std::promise<Evaluation> promise;
  auto word = evaluation.word;
  promise.set_value(std::move(evaluation));
  std::lock_guard lock(mutex_);
  entries_.insert_or_assign(std::move(word), promise.get_future().share());
}

bool CachingEvaluator::contains(const GeneWord& word) const {
  std::lock_guard lock(mutex_);
  return entries_.count(word) != 0;
}

std::size_t CachingEvaluator::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

WorkerPool::WorkerPool(std::size_t workers) {
  if (workers == 0) throw DomainError("worker count must be at least 1");
  threads_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { run(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run() {
  while (true) {
    std::function<void()> task;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
      if (tasks_.empty()) return;
      task = std::move(tasks_.front());
      tasks_.pop();
    }
    task();
  }
}

std::vector<Evaluation> PooledEvaluator::evaluate_batch(std::span<const GeneWord> words) {
  std::vector<std::future<Evaluation>> pending;
  pending.reserve(words.size());
  for (const auto& w : words) pending.push_back(pool_.submit([this, w] { return cache_.evaluate(w); }));
  std::vector<Evaluation> out;
  out.reserve(words.size());
  std::exception_ptr fatal;
  for (auto& f : pending) {
    try {
      out.push_back(f.get());
    } catch (...) {
      if (!fatal) fatal = std::current_exception();
    }
  }
  if (fatal) std::rethrow_exception(fatal);
  return out;
}

}  // namespace phylopt
