#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace yoto {

// Invalid arguments are reported with std::invalid_argument. The types below
// cover the remaining failure classes.

/// A documented precondition on the input data does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values showed up while evaluating a model or a gradient.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced non-finite gradients or state at a given step.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(std::int64_t step, const std::string& what)
      : NumericalError("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

/// Malformed or unreadable experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace yoto
