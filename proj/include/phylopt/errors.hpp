#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phylopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition or range violation on a domain value.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Malformed or inconsistent input files (alignments, configs, journals).
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class JournalError : public Error {
 public:
  JournalError(const std::string& what, std::size_t line)
      : Error("journal line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace phylopt
