#pragma once

#include <stdexcept>
#include <string>

namespace streakforge {

/// Problem with input data: malformed records, missing cells, unknown ids.
/// The CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent line in a newline-delimited input stream.
class IngestError : public DataError {
 public:
  IngestError(std::string source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Caller violated a documented precondition (bad parameters, too-short input).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace streakforge
