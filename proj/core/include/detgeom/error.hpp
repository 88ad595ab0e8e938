#pragma once

#include <stdexcept>
#include <string>

namespace detgeom {

// Input did not satisfy a documented precondition. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure while running an otherwise valid request. Maps to CLI exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidBoxError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RatioOutOfRangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownLossKindError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GroupMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EvenKernelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownHeadError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed input file; what() carries "file:line: reason".
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& reason)
      : ValidationError(file + ":" + std::to_string(line) + ": " + reason),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// A metric is undefined for the given data (e.g. AP of a class without truths).
class UndefinedMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ScenarioUnsatisfiableError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class NumericError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class IoError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

// Broken internal accounting; always checked, never compiled out.
class InvariantViolation : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

}  // namespace detgeom
