#include "phylopt/journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace phylopt {
namespace {

constexpr std::size_t kFields = 10;

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string sanitize(std::string text) {
  for (auto& c : text)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return text.empty() ? std::string("-") : text;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

template <typename T>
T parse_integer(std::string_view text, const char* field, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw JournalError(std::string("malformed ") + field + " '" + std::string(text) + "'", line_no);
  return value;
}

double parse_real(std::string_view text, const char* field, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw JournalError(std::string("malformed ") + field + " '" + std::string(text) + "'", line_no);
  return value;
}

}  // namespace

JournalRecord make_record(Stage stage, const Evaluation& evaluation) {
  JournalRecord r{.stage = stage, .ok = evaluation.ok(), .word = evaluation.word};
  r.p = gene_rate(evaluation.word);
  if (evaluation.ok()) {
    const auto& t = *evaluation.result;
    r.b = t.score.lowest_bootstrap;
    r.p = t.score.gene_rate;
    r.s = t.score.fitness;
    r.topology = t.topology.digest;
    r.seed = t.meta.seed;
    r.duration_ms = t.meta.duration_ms;
    r.newick = serialize_newick(t.tree);
  } else {
    r.newick = sanitize(evaluation.error);
  }
  return r;
}

Evaluation to_evaluation(const JournalRecord& record) {
  if (!record.ok) return Evaluation{record.word, std::nullopt, record.newick};
  auto tree = make_scored_tree(record.word, parse_newick(record.newick),
                               EvalMeta{record.seed, record.duration_ms});
  tree.score.fitness = record.s;
  return Evaluation{record.word, std::move(tree), {}};
}

std::string format_record(const JournalRecord& r) {
  std::string line;
  line += std::to_string(static_cast<int>(r.stage));
  line += '\t';
  line += r.ok ? "ok" : "failed";
  line += '\t';
  line += r.word.to_string();
  line += '\t';
  line += std::to_string(r.b);
  line += '\t';
  line += fixed4(r.p);
  line += '\t';
  line += fixed4(r.s);
  line += '\t';
  line += r.topology.empty() ? std::string("-") : r.topology;
  line += '\t';
  line += std::to_string(r.seed);
  line += '\t';
  line += std::to_string(r.duration_ms);
  line += '\t';
  line += r.ok ? r.newick : sanitize(r.newick);
  return line;
}

JournalRecord parse_record(std::string_view line, std::size_t line_no) {
  const auto f = split_tabs(line);
  if (f.size() != kFields)
    throw JournalError("expected " + std::to_string(kFields) + " fields, found " + std::to_string(f.size()),
                       line_no);
  const int stage_code = parse_integer<int>(f[0], "stage code", line_no);
  if (stage_code < 1 || stage_code > 3) throw JournalError("unknown stage code", line_no);
  bool ok = false;
  if (f[1] == "ok") ok = true;
  else if (f[1] != "failed") throw JournalError("status must be 'ok' or 'failed'", line_no);

  std::optional<GeneWord> word;
  try {
    word = GeneWord::parse(f[2]);
  } catch (const DomainError& e) {
    throw JournalError(std::string("bad word: ") + e.what(), line_no);
  }
  JournalRecord r{.stage = static_cast<Stage>(stage_code), .ok = ok, .word = std::move(*word)};
  r.b = parse_integer<int>(f[3], "lowest bootstrap", line_no);
  const double p = parse_real(f[4], "gene rate", line_no);
  const double s = parse_real(f[5], "fitness", line_no);
  r.p = gene_rate(r.word);
  if (std::abs(p - r.p) > 5.1e-5) throw JournalError("gene rate disagrees with the word", line_no);
  r.seed = parse_integer<std::uint64_t>(f[7], "seed", line_no);
  r.duration_ms = parse_integer<std::int64_t>(f[8], "duration", line_no);
  r.newick = std::string(f[9]);

  if (!ok) {
    if (r.b != 0 || f[6] != "-") throw JournalError("failed record carries a score", line_no);
    return r;
  }
  if (r.b < 0 || r.b > 100) throw JournalError("lowest bootstrap outside [0, 100]", line_no);
  r.s = std::abs(s - (r.b + r.p)) <= 1.01e-4 ? r.b + r.p : s;
  r.topology = std::string(f[6]);
  try {
    const auto tree = parse_newick(r.newick);
    if (lowest_support(tree) != r.b) throw JournalError("lowest bootstrap disagrees with the tree", line_no);
    if (topology_key(tree).digest != r.topology) throw JournalError("topology digest disagrees with the tree", line_no);
  } catch (const ParseError& e) {
    throw JournalError(std::string("bad tree: ") + e.what(), line_no);
  } catch (const DomainError& e) {
    throw JournalError(std::string("bad tree: ") + e.what(), line_no);
  }
  return r;
}

// ---------------------------------------------------------------------------

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

Journal::Journal(Journal&& other) noexcept
    : records_(std::move(other.records_)), index_(std::move(other.index_)), fd_(other.fd_) {
  other.fd_ = -1;
}

Journal& Journal::operator=(Journal&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    records_ = std::move(other.records_);
    index_ = std::move(other.index_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

Journal Journal::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read journal " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  Journal journal;
  std::size_t start = 0;
  std::size_t line_no = 0;
  std::optional<std::size_t> width;
  while (start < text.size()) {
    ++line_no;
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) throw JournalError("truncated final line", line_no);
    const std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    if (line.empty()) throw JournalError("empty line", line_no);
    auto record = parse_record(line, line_no);
    if (!width) width = record.word.size();
    if (record.word.size() != *width) throw JournalError("word length differs from earlier records", line_no);
    if (record.ok) {
      if (const auto* prev = journal.find(record.word); prev && prev->ok)
        throw JournalError("second ok record for word " + record.word.to_string(), line_no);
    }
    journal.records_.push_back(std::move(record));
    journal.index(journal.records_.size() - 1);
  }
  return journal;
}

void Journal::attach(const std::filesystem::path& path) {
  if (fd_ >= 0) ::close(fd_);
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw InputError("cannot open journal " + path.string() + ": " + std::strerror(errno));
}

void Journal::index(std::size_t position) {
  const auto& r = records_[position];
  auto it = index_.find(r.word);
  // an ok record stays the word's reference once present
  if (it == index_.end()) index_.emplace(r.word, position);
  else if (!records_[it->second].ok) it->second = position;
}

void Journal::append(JournalRecord record) {
  if (record.ok)
    if (const auto* prev = find(record.word); prev && prev->ok)
      throw DomainError("journal already holds an ok record for " + record.word.to_string());
  if (fd_ >= 0) {
    const std::string line = format_record(record) + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const auto n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("journal write failed: ") + std::strerror(errno));
      }
      written += static_cast<std::size_t>(n);
    }
  }
  records_.push_back(std::move(record));
  index(records_.size() - 1);
}

std::size_t Journal::ok_count() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.ok ? 1 : 0;
  return n;
}

const JournalRecord* Journal::find(const GeneWord& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? nullptr : &records_[it->second];
}

}  // namespace phylopt
