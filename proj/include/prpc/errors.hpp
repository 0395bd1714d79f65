#pragma once

#include <stdexcept>
#include <string>

namespace prpc {

/// Caller broke an API contract (dimension mismatch, negative multiplier, ...).
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// An evaluator produced an invalid value (non-finite loss, negative violation).
/// The message names the offending instance.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

/// A grid request exceeds the configured evaluation budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, long long required_evals)
      : std::runtime_error(what), required(required_evals) {}
  long long required;
};

/// Bisection bracket does not straddle the target violation level.
class InvalidBracket : public std::invalid_argument {
 public:
  explicit InvalidBracket(const std::string& what) : std::invalid_argument(what) {}
};

/// Experiment configuration failed schema validation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace prpc
