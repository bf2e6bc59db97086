#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace facesim {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  ok = 0,
  usage = 2,
  data = 3,
  divergence = 4,
  infeasible_split = 5,
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual ExitCode exit_code() const noexcept { return ExitCode::data; }
  virtual const char* kind() const noexcept { return "error"; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::usage; }
  const char* kind() const noexcept override { return "usage"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

/// Malformed input text. Carries the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "parse"; }

 private:
  std::size_t line_;
};

/// Shape mismatch (vector dimension, matrix size).
class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

/// A value violates a domain invariant (zero vector, bad config).
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

/// Cross-reference failure (unknown id, duplicate id, missing label).
class IntegrityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "integrity"; }
};

/// Cosine of a zero-norm vector was requested.
class DegenerateVectorError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate-vector"; }
};

class EvaluationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "evaluation"; }
};

/// Non-finite loss or weights during training.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, std::size_t batch, const std::string& what);
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }
  ExitCode exit_code() const noexcept override { return ExitCode::divergence; }
  const char* kind() const noexcept override { return "divergence"; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

/// The requested evaluation split cannot be realized on the given corpus.
class InfeasibleSplitError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::infeasible_split; }
  const char* kind() const noexcept override { return "infeasible-split"; }
};

}  // namespace facesim
