#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace massera {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in an expression string. `position` is a byte offset into the
/// source and never exceeds its length.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::string message, std::string expected);

  [[nodiscard]] std::size_t position() const noexcept { return position_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }
  [[nodiscard]] const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string detail_;
  std::string expected_;
};

/// Domain violation while evaluating an expression tree (sqrt of a negative
/// radicand, log of a non-positive argument, division by zero, ...).
class EvalError : public Error {
 public:
  EvalError(std::string node_path, double operand, const std::string& what);

  [[nodiscard]] const std::string& node_path() const noexcept { return node_path_; }
  [[nodiscard]] double operand() const noexcept { return operand_; }

 private:
  std::string node_path_;
  double operand_;
};

/// A right-hand side could not be evaluated at (t, x).
class DomainError : public Error {
 public:
  DomainError(double t, double x, const std::string& what);

  [[nodiscard]] double t() const noexcept { return t_; }
  [[nodiscard]] double x() const noexcept { return x_; }

 private:
  double t_;
  double x_;
};

/// Adaptive integration gave up. Carries the last accepted state.
class IntegrationError : public Error {
 public:
  IntegrationError(double t_last, double x_last, const std::string& what);

  [[nodiscard]] double t_last() const noexcept { return t_last_; }
  [[nodiscard]] double x_last() const noexcept { return x_last_; }

 private:
  double t_last_;
  double x_last_;
};

/// The solution left the region |x| < x_max before the requested time.
class BlowUpError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

/// A difference equation could not be iterated further.
class IterationError : public Error {
 public:
  IterationError(long long step, double x, const std::string& what);

  [[nodiscard]] long long step() const noexcept { return step_; }
  [[nodiscard]] double x() const noexcept { return x_; }

 private:
  long long step_;
  double x_;
};

/// Query outside the domain covered by a trajectory or sampled function.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument combination for an operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent field or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace massera
