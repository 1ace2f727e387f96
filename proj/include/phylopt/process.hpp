#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phylopt {

/// Splits a command template on whitespace outside single or double quotes.
/// Quotes group characters and are removed; no other shell syntax applies.
std::vector<std::string> split_command(std::string_view command);

/// Replaces {name} placeholders in every argument.
std::vector<std::string> substitute(std::vector<std::string> argv,
                                    const std::map<std::string, std::string>& values);

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::chrono::milliseconds elapsed{0};
  std::string stderr_tail;
};

/// Runs argv (no shell) in `cwd` with stdout/stderr redirected to files
/// there. Kills the child once `timeout` elapses.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::chrono::duration<double> timeout);

}  // namespace phylopt
