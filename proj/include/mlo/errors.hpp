#pragma once

#include <stdexcept>
#include <string>

namespace mlo {

/// Invalid parameter or precondition violation on a model input.
class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A chain or coupling quantity hit a singular point (X = 1, p = 1, ...).
class SingularModelError : public ModelError {
public:
  using ModelError::ModelError;
};

/// Event probabilities or busy fractions left their feasible range; the
/// tau/p inputs are not a valid operating point.
class ModelInconsistencyError : public ModelError {
public:
  using ModelError::ModelError;
};

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace mlo
