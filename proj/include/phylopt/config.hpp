#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "phylopt/evaluator.hpp"
#include "phylopt/pipeline.hpp"

namespace phylopt {

enum class Backend { synthetic, external };

struct SyntheticSettings {
  std::vector<std::string> noisy;  // gene names
  int base = 100;
  int penalty = 0;
  int flip_threshold = 0;

  friend bool operator==(const SyntheticSettings&, const SyntheticSettings&) = default;
};

struct ExternalSettings {
  std::filesystem::path alignment_dir;  // holds <gene>.fasta per gene
  std::string align_command;            // empty for pre-aligned inputs
  std::string infer_command;

  friend bool operator==(const ExternalSettings&, const ExternalSettings&) = default;
};

/// Everything a run needs. Relative paths are resolved against the directory
/// of the config file by the CLI.
struct RunConfig {
  PipelineConfig pipeline;
  Backend backend = Backend::synthetic;
  std::uint64_t tool_seed = 12345;
  double timeout_seconds = 3600.0;
  std::filesystem::path workdir = "phylopt-work";
  std::filesystem::path journal = "phylopt.journal";
  SyntheticSettings synthetic;
  ExternalSettings external;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// INI text with sections [pipeline], [ga], [genes], [evaluator],
/// [synthetic] and [external]. Unknown keys, bad values and missing required
/// keys (genes.list, evaluator.backend) are all reported in one ConfigError.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

/// Every key, defaults included; parse_config_text inverts it exactly.
std::string serialize_config(const RunConfig& config);

/// Builds the configured backend. `base_dir` anchors relative paths and
/// `workdir_override` (PHYLOPT_WORKDIR) replaces the configured scratch dir.
std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config, const std::filesystem::path& base_dir,
                                          const std::filesystem::path& workdir_override = {});

/// Input files whose digests belong in a run manifest.
std::vector<std::filesystem::path> input_files(const RunConfig& config, const std::filesystem::path& base_dir);

std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::filesystem::path& p);

}  // namespace phylopt
