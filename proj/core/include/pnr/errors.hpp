#pragma once

#include <stdexcept>
#include <string>

namespace pnr {

/// Base for every error raised by the library. `category()` is stable and
/// is what the command-line front end maps to an exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { Domain, Config, Degenerate, Numeric, Io };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

/// Argument outside the mathematical domain of an operation (negative mean, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Category::Domain, what) {}
};

/// Inconsistent or unparsable configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::Config, what) {}
};

/// Input that leaves a conditional or renormalization undefined.
class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what)
      : Error(Category::Degenerate, what) {}
};

/// Bayesian conditional whose denominator (the click probability) is zero.
class UndefinedConditionalError : public DegenerateInputError {
 public:
  explicit UndefinedConditionalError(const std::string& what)
      : DegenerateInputError(what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::Numeric, what) {}
};

/// Triangular solve hit a zero pivot.
class SingularSystemError : public NumericError {
 public:
  explicit SingularSystemError(const std::string& what) : NumericError(what) {}
};

/// Iterative search gave up; carries the best point it found.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double best_x, double best_value)
      : NumericError(what), best_x_(best_x), best_value_(best_value) {}

  double best_x() const noexcept { return best_x_; }
  double best_value() const noexcept { return best_value_; }

 private:
  double best_x_;
  double best_value_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Category::Io, what) {}
};

const char* to_string(Error::Category category) noexcept;

}  // namespace pnr
