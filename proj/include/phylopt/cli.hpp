#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace phylopt {

inline constexpr int kExitWinner = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitExhausted = 2;

/// Provenance of one run, stored next to the journal as JSON.
struct RunManifest {
  std::string config;                               // serialized effective config
  std::map<std::string, std::string> input_digests;  // path -> SHA-256
  std::map<std::string, std::string> tools;          // name -> version or command
  std::uint64_t pipeline_seed = 0;
  std::uint64_t tool_seed = 0;
  std::string started;   // UTC, ISO 8601
  std::string finished;  // empty while running
  std::optional<int> stage_code;
  std::string outcome;  // running, winner, exhausted, error

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

std::filesystem::path manifest_path(const std::filesystem::path& journal);

/// Inputs whose current digest differs from the manifest (or is unreadable).
std::vector<std::string> stale_inputs(const RunManifest& manifest);

struct RunOptions {
  std::filesystem::path config;
  bool resume = false;
  bool dry_run = false;
  bool elevate = false;  // use the config's elevated target
  bool machine_readable = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<double> gamma;
  std::optional<int> target;
  std::optional<std::filesystem::path> journal;
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& journal, double gamma, bool machine_readable, std::ostream& out,
               std::ostream& err);
int cmd_validate(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Parses `args` (program name first) and dispatches to a subcommand.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phylopt
