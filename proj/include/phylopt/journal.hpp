#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phylopt/evaluator.hpp"

namespace phylopt {

/// Pipeline stage codes: systematic, random, optimisation (GA and Lasso).
enum class Stage : int { systematic = 1, random = 2, optimization = 3 };

/// One journal line. Failed records carry no tree: b and s are 0, the
/// topology is empty and `newick` holds the sanitised diagnostic.
struct JournalRecord {
  Stage stage = Stage::systematic;
  bool ok = false;
  GeneWord word;
  int b = 0;
  double p = 0.0;
  double s = 0.0;
  std::string topology{};  // hex digest
  std::uint64_t seed = 0;
  std::int64_t duration_ms = 0;
  std::string newick{};

  friend bool operator==(const JournalRecord&, const JournalRecord&) = default;
};

JournalRecord make_record(Stage stage, const Evaluation& evaluation);

/// Re-parses an ok record into the evaluation it stands for.
Evaluation to_evaluation(const JournalRecord& record);

/// Tab-separated line without the trailing newline.
std::string format_record(const JournalRecord& record);
/// Validates every field; throws JournalError naming `line_no`.
JournalRecord parse_record(std::string_view line, std::size_t line_no);

/// Append-only evaluation log, optionally mirrored to a file. Each record is
/// written with a single write() call; a torn final line fails to load.
class Journal {
 public:
  Journal() = default;
  ~Journal();
  Journal(Journal&&) noexcept;
  Journal& operator=(Journal&&) noexcept;
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  /// Reads and validates a journal file; throws JournalError at the first
  /// corrupt line.
  static Journal load(const std::filesystem::path& path);

  /// Starts mirroring appends to `path` (created if absent).
  void attach(const std::filesystem::path& path);

  /// Throws DomainError when an ok record for the word already exists.
  void append(JournalRecord record);

  const std::vector<JournalRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::size_t ok_count() const;
  bool contains(const GeneWord& word) const { return index_.count(word) != 0; }
  const JournalRecord* find(const GeneWord& word) const;

 private:
  void index(std::size_t position);

  std::vector<JournalRecord> records_;
  std::unordered_map<GeneWord, std::size_t> index_;  // latest record per word
  int fd_ = -1;
};

}  // namespace phylopt
