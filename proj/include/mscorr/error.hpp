#pragma once

#include <stdexcept>
#include <string>

namespace mscorr {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kDataError = 1,
  kConfigError = 2,
  kEstimationError = 3,
};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual ExitCode exit_code() const noexcept = 0;
};

/// Bad input data: malformed rows, duplicates, non-positive prices, empty panels.
class DataError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kDataError; }
};

/// A row of a delimited file could not be parsed. Carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid configuration, recipes or mismatched report structures.
class ConfigError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kConfigError; }
};

/// A numerical estimate is undefined for the given input (degenerate moments,
/// singular regressions, constant series, all-tied ranks).
class EstimationError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override {
    return ExitCode::kEstimationError;
  }
};

/// Pearson correlation of a constant series.
class UndefinedCorrelationError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Rank statistic of a fully tied (or constant) series.
class UndefinedRankError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Least-squares fit with a degenerate design.
class SingularFitError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace mscorr
