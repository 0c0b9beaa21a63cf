#pragma once

#include <stdexcept>
#include <string>

namespace sgame {

// Bad user-supplied configuration (parameter ranges, mismatched supports,
// malformed config files). CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A model closure violated its declared contract (kernel not a distribution,
// increment outside the declared bound, non-finite payoff).
class ModelContractError : public std::runtime_error {
 public:
  explicit ModelContractError(const std::string& what)
      : std::runtime_error(what) {}
};

// An iterative solver hit its iteration cap before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual(last_residual) {}
  double last_residual;
};

}  // namespace sgame
