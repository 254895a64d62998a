#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pfsi {

/// Argument outside the mathematical domain of an operation (non-finite input,
/// derivative that does not exist for the field, ...).
class InputDomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent setup: mismatched bases or grids, invalid parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver failed. Carries the residual history so the caller can
/// report how far it got.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}

  const std::vector<double>& history() const noexcept { return history_; }
  double final_residual() const noexcept { return history_.empty() ? -1.0 : history_.back(); }

 private:
  std::vector<double> history_;
};

/// Violated internal invariant (singular matrix where coercivity guarantees
/// invertibility, ...). Indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Corrupt, truncated or version-mismatched archive.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pfsi
