#pragma once

#include <stdexcept>
#include <string>

namespace fldi {

/// Invalid argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input outside a model's documented validity range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed or inconsistent data (unsorted streams, bad files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative method failed to converge or hit a degenerate case.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Configuration file problems; `location` is a JSON pointer into the document.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& location, const std::string& message)
      : std::runtime_error(location + ": " + message), location_(location) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

/// Bad command-line usage (maps to exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fldi

namespace fldi {

/// Root bracket contains no sign change.
class NoPhaseMatchError : public NumericError {
 public:
  NoPhaseMatchError(const std::string& what, double residual) : NumericError(what, residual) {}
};

}  // namespace fldi
